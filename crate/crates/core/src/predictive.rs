//! Complex-cell layer: a rectified linear predictor of the next normalized
//! Simple response from the current one plus delayed recurrent, lateral and
//! top-down context.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, PvmError, Result};
use crate::sparse_coding::GUARD;

/// Lateral neighbor order inside the context vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    /// Grid offset `(dx, dy)` with y growing downward.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::North => (0, -1),
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
        }
    }
}

/// Index of each block in the context vector.
pub const BLOCK_SIMPLE: usize = 0;
pub const BLOCK_RECURRENT: usize = 1;
pub const BLOCK_LATERAL: usize = 2;
pub const BLOCK_FEEDBACK: usize = 6;

/// Constants of the Complex learning rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComplexParams {
    /// Weak ℓ₂ decay factor applied to all weights (times the rate).
    pub weak_decay: f64,
    /// Strong decay on self connections (times the rate).
    pub self_penalty: f64,
    /// A Complex cell counts as "on" when its prediction exceeds this.
    pub gate_threshold: f64,
    /// Additive gate term that keeps silent cells learning.
    pub gate_floor: f64,
    /// Rate schedule `1 / (rate_offset + t / rate_divisor)`.
    pub rate_offset: f64,
    pub rate_divisor: f64,
    /// Average (true) or sum (false) per-tile gradients of shared weights.
    pub average_tiles: bool,
}

impl Default for ComplexParams {
    fn default() -> Self {
        ComplexParams {
            weak_decay: 1e-5,
            self_penalty: 0.9,
            gate_threshold: 0.0,
            gate_floor: 0.01,
            rate_offset: 10000.0,
            rate_divisor: 10.0,
            average_tiles: true,
        }
    }
}

impl ComplexParams {
    pub fn rate(&self, t: u64) -> f64 {
        1.0 / (self.rate_offset + t as f64 / self.rate_divisor)
    }
}

/// Context for one prediction: `[a | c_prev | north | east | south | west | feedback]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVector(pub Vec<f64>);

impl ContextVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Concatenate the context blocks; absent laterals and feedback are zeros.
/// `feedback_dim` is the parent's response length (the own `J` at the top).
pub fn assemble_context(
    a: &[f64],
    c_prev: &[f64],
    laterals: [Option<&[f64]>; 4],
    feedback: Option<&[f64]>,
    feedback_dim: usize,
) -> Result<ContextVector> {
    let j = a.len();
    ensure_len("context recurrent block", j, c_prev.len())?;
    let mut p0 = Vec::with_capacity(6 * j + feedback_dim);
    p0.extend_from_slice(a);
    p0.extend_from_slice(c_prev);
    for lateral in laterals {
        match lateral {
            Some(l) => {
                ensure_len("context lateral block", j, l.len())?;
                p0.extend_from_slice(l);
            }
            None => p0.extend(std::iter::repeat_n(0.0, j)),
        }
    }
    match feedback {
        Some(f) => {
            ensure_len("context feedback block", feedback_dim, f.len())?;
            p0.extend_from_slice(f);
        }
        None => p0.extend(std::iter::repeat_n(0.0, feedback_dim)),
    }
    Ok(ContextVector(p0))
}

/// Shared Complex weights of one level: `C` is `(6J + J_feedback) × J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWeights {
    pub c: Array2<f64>,
    /// Learning steps taken so far.
    pub t: u64,
}

impl ComplexWeights {
    pub fn zeros(j: usize, feedback_dim: usize) -> Self {
        ComplexWeights {
            c: Array2::zeros((6 * j + feedback_dim, j)),
            t: 0,
        }
    }

    pub fn cells(&self) -> usize {
        self.c.ncols()
    }

    pub fn context_dim(&self) -> usize {
        self.c.nrows()
    }

    /// Rows of `C` belonging to context block `block` (see `BLOCK_*`).
    pub fn block(&self, block: usize) -> ndarray::ArrayView2<'_, f64> {
        let j = self.cells();
        let end = if block == BLOCK_FEEDBACK {
            self.context_dim()
        } else {
            (block + 1) * j
        };
        self.c.slice(ndarray::s![block * j..end, ..])
    }
}

/// `⌊p0 · C⌋`.
pub fn complex_activate(p0: &ContextVector, weights: &ComplexWeights) -> Result<Vec<f64>> {
    ensure_len("complex context", weights.context_dim(), p0.len())?;
    let mut out = ndarray::Array1::<f64>::zeros(weights.cells());
    for (r, &p) in p0.0.iter().enumerate() {
        if p != 0.0 {
            out.scaled_add(p, &weights.c.row(r));
        }
    }
    Ok(out.iter().map(|&v| v.max(0.0)).collect())
}

/// A clipped per-tile gradient in factored form: `G = p0 ⊗ d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneGradient {
    pub p0: Vec<f64>,
    pub d: Vec<f64>,
}

impl RankOneGradient {
    pub fn max_abs(&self) -> f64 {
        let pm = self.p0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dm = self.d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        pm * dm
    }
}

/// Error-driven gradient for one tile, divided by `max(1, max|G| + 1e-7)`.
/// Reads only this tile's context, prediction and next Simple response.
pub fn complex_gradient(
    p0: &ContextVector,
    c_pred: &[f64],
    a_next: &[f64],
    params: &ComplexParams,
) -> Result<RankOneGradient> {
    ensure_len("complex target", c_pred.len(), a_next.len())?;
    if p0
        .0
        .iter()
        .chain(c_pred)
        .chain(a_next)
        .any(|v| !v.is_finite())
    {
        return Err(PvmError::NonFinite("complex learning inputs"));
    }
    let mut d: Vec<f64> = c_pred
        .iter()
        .zip(a_next)
        .map(|(&c, &a)| {
            let gate = if c > params.gate_threshold { 1.0 } else { 0.0 };
            (a - c) * (gate + params.gate_floor)
        })
        .collect();
    let mut g = RankOneGradient {
        p0: p0.0.clone(),
        d: Vec::new(),
    };
    let pm = g.p0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = 1.0 / (pm * dm + GUARD).max(1.0);
    d.iter_mut().for_each(|v| *v *= scale);
    g.d = d;
    Ok(g)
}

/// Apply decay and the (mean or summed) per-tile gradients, then advance `t`.
pub fn apply_complex_update(
    weights: &mut ComplexWeights,
    grads: &[RankOneGradient],
    params: &ComplexParams,
) -> Result<()> {
    let j = weights.cells();
    for g in grads {
        ensure_len("gradient context", weights.context_dim(), g.p0.len())?;
        ensure_len("gradient cells", j, g.d.len())?;
    }
    let r = params.rate(weights.t);
    weights
        .c
        .mapv_inplace(|v| v * (1.0 - params.weak_decay * r));
    let self_factor = 1.0 - params.self_penalty * r;
    for i in 0..j {
        weights.c[[BLOCK_SIMPLE * j + i, i]] *= self_factor;
    }
    if !grads.is_empty() {
        let step = if params.average_tiles {
            r / grads.len() as f64
        } else {
            r
        };
        for g in grads {
            let d = ArrayView1::from(&g.d[..]);
            for (row, &p) in g.p0.iter().enumerate() {
                if p != 0.0 {
                    weights.c.row_mut(row).scaled_add(step * p, &d);
                }
            }
        }
    }
    weights.t += 1;
    Ok(())
}

/// Single-tile learning step: gradient, decay, update.
pub fn complex_learn(
    weights: &mut ComplexWeights,
    p0: &ContextVector,
    c_pred: &[f64],
    a_next: &[f64],
    params: &ComplexParams,
) -> Result<()> {
    let g = complex_gradient(p0, c_pred, a_next, params)?;
    apply_complex_update(weights, std::slice::from_ref(&g), params)
}

/// Per-tile running variance of Complex responses.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexState {
    pub v: Vec<f64>,
}

impl ComplexState {
    pub fn new(j: usize) -> Self {
        ComplexState { v: vec![1.0; j] }
    }
}

/// Divide by the running RMS. With `learn` the variance is first updated as
/// an exponential average with rate `r(t)`.
pub fn normalize_complex(
    c0: &[f64],
    state: &mut ComplexState,
    t: u64,
    learn: bool,
    params: &ComplexParams,
) -> Vec<f64> {
    if learn {
        let r = params.rate(t);
        for (v, &c) in state.v.iter_mut().zip(c0) {
            *v = (1.0 - r) * *v + r * c * c;
        }
    }
    c0.iter()
        .zip(&state.v)
        .map(|(&c, &v)| c / (v.sqrt() + GUARD))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_layout_and_zero_fill() {
        let a = [1.0, 2.0];
        let c = [3.0, 4.0];
        let east = [5.0, 6.0];
        let p0 = assemble_context(&a, &c, [None, Some(&east), None, None], None, 2).unwrap();
        assert_eq!(
            p0.0,
            vec![1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 5.0, 6.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert!(assemble_context(&a, &[1.0], [None; 4], None, 2).is_err());
    }

    #[test]
    fn full_size_context_length() {
        let v = vec![0.5; 401];
        let p0 = assemble_context(&v, &v, [Some(&v[..]); 4], Some(&v), 401).unwrap();
        assert_eq!(p0.len(), 2807);
    }

    #[test]
    fn activation_rectifies() {
        let mut w = ComplexWeights::zeros(2, 2);
        let p0 = ContextVector(vec![1.0; 14]);
        assert_eq!(complex_activate(&p0, &w).unwrap(), vec![0.0, 0.0]);
        w.c[[0, 0]] = 3.0;
        w.c[[0, 1]] = -2.0;
        let mut p = vec![0.0; 14];
        p[0] = 1.0;
        assert_eq!(
            complex_activate(&ContextVector(p), &w).unwrap(),
            vec![3.0, 0.0]
        );
    }

    #[test]
    fn initial_rate_is_one_over_ten_thousand() {
        assert_eq!(ComplexParams::default().rate(0), 1e-4);
    }

    #[test]
    fn perfect_prediction_only_decays() {
        let params = ComplexParams::default();
        let mut w = ComplexWeights::zeros(1, 1);
        w.c.fill(0.5);
        let p0 = ContextVector(vec![1.0; 7]);
        complex_learn(&mut w, &p0, &[0.7], &[0.7], &params).unwrap();
        let r = 1e-4;
        let weak = 0.5 * (1.0 - 1e-5 * r);
        assert_eq!(w.c[[0, 0]], weak * (1.0 - 0.9 * r));
        assert_eq!(w.c[[3, 0]], weak);
        assert_eq!(w.t, 1);
    }

    #[test]
    fn gradient_clip_single_entry() {
        // p0 = (1), d = (5): the clipped gradient is 5 / (5 + 1e-7).
        let params = ComplexParams {
            gate_floor: 0.0,
            ..Default::default()
        };
        let g = complex_gradient(&ContextVector(vec![1.0]), &[1.0], &[6.0], &params).unwrap();
        assert!((g.d[0] - 5.0 / (5.0 + GUARD)).abs() < 1e-15);
        assert!(g.max_abs() <= 1.0);
    }

    #[test]
    fn non_finite_learning_leaves_state() {
        let params = ComplexParams::default();
        let mut w = ComplexWeights::zeros(1, 1);
        let before = w.clone();
        let p0 = ContextVector(vec![f64::NAN; 7]);
        assert!(complex_learn(&mut w, &p0, &[0.0], &[1.0], &params).is_err());
        assert_eq!(w, before);
    }

    #[test]
    fn normalization_fixed_point() {
        let params = ComplexParams::default();
        let mut st = ComplexState { v: vec![9.0] };
        let c = normalize_complex(&[3.0], &mut st, 0, false, &params);
        assert!((c[0] - 1.0).abs() < 1e-6);
        let mut st = ComplexState::new(1);
        let mut last = 0.0;
        for t in 0..200_000u64 {
            last = normalize_complex(&[5.0], &mut st, t, true, &params)[0];
        }
        assert!((st.v[0] - 25.0).abs() < 1e-3, "v = {}", st.v[0]);
        assert!((last - 1.0).abs() < 1e-4);
        let mut st = ComplexState { v: vec![4.0] };
        assert_eq!(
            normalize_complex(&[0.0], &mut st, 0, false, &params),
            vec![0.0]
        );
    }

    #[test]
    fn self_connections_decay_faster() {
        let params = ComplexParams::default();
        let mut w = ComplexWeights::zeros(2, 2);
        w.c.fill(1.0);
        for _ in 0..1000 {
            apply_complex_update(&mut w, &[], &params).unwrap();
        }
        assert!(w.c[[0, 0]].abs() < w.c[[1, 0]].abs());
        assert!(w.c[[1, 1]].abs() < w.c[[0, 1]].abs());
    }
}
