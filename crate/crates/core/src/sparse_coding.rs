//! Simple-cell layer: adaptive sparse coding (ASC), online dictionary learning
//! by block coordinate descent, and activation normalization.
//!
//! ASC solves a nonnegative lasso by coordinate descent while rescaling λ
//! after every sweep until exactly `N` coefficients are active (or `T`
//! sweeps are spent). The starting λ is `max(xD) * s`, where `s` is a running
//! average of how far λ ends up from `max(xD)`; this makes the active count
//! independent of input contrast.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, PvmError, Result};

/// Guard added to divisors in the dictionary update and normalizations.
pub const GUARD: f64 = 1e-7;

/// Below this `max(xD)` the input excites nothing and sweeps are skipped.
const DEGENERATE_PEAK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleParams {
    /// Dictionary size.
    pub k: usize,
    /// Target number of active cells.
    pub n: usize,
    /// Maximum sweeps per encode.
    pub t_max: usize,
}

impl Default for SimpleParams {
    fn default() -> Self {
        SimpleParams {
            k: 400,
            n: 70,
            t_max: 25,
        }
    }
}

impl SimpleParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n >= self.k {
            return Err(PvmError::Config(format!(
                "active-cell target N={} must satisfy 0 < N < K={}",
                self.n, self.k
            )));
        }
        if self.t_max == 0 {
            return Err(PvmError::Config("T must be >= 1".into()));
        }
        if self.n * 4 > self.k {
            log::warn!(
                "N={} exceeds K/4={}; receptive fields tend to lose their oriented structure",
                self.n,
                self.k / 4
            );
        }
        Ok(())
    }
}

/// Schedule of dictionary update events: the first after `initial` steps,
/// each following interval `growth` times longer (rounded).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UpdateSchedule {
    pub initial: u64,
    pub growth: f64,
}

impl Default for UpdateSchedule {
    fn default() -> Self {
        UpdateSchedule {
            initial: 1000,
            growth: 1.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub a: Vec<f64>,
    pub lambda_final: f64,
    pub iterations_used: usize,
    /// `λ_final / max(xD)`; feeds the running λ scale.
    pub lambda_ratio: f64,
    /// Set when `max(xD)` was not positive and no sweep ran.
    pub degenerate: bool,
}

impl SparseCode {
    pub fn active_count(&self) -> usize {
        self.a.iter().filter(|&&v| v != 0.0).count()
    }
}

/// Shared Simple-cell weights of one level plus their learning statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    /// Atoms as rows: `atoms[[k, ..]]` is column `k` of `D` (length m).
    atoms: Array2<f64>,
    /// `DᵀD`, recomputed whenever `D` changes. Used by inference only.
    gram: Array2<f64>,
    /// Input/activation correlation, stored like `atoms` (row k = `B[:,k]`).
    b: Array2<f64>,
    /// Running activation autocorrelation (K×K).
    e: Array2<f64>,
    /// Average λ scale.
    s: f64,
    pending_ya: Array2<f64>,
    pending_aa: Array2<f64>,
    pending_n: u64,
    steps_since_update: u64,
    next_interval: u64,
    updates_done: u64,
    schedule: UpdateSchedule,
}

impl Dictionary {
    /// Random unit-norm atoms; zero statistics; `s = 0.5`.
    pub fn random<R: Rng + ?Sized>(
        m: usize,
        k: usize,
        schedule: UpdateSchedule,
        rng: &mut R,
    ) -> Self {
        let mut atoms = Array2::<f64>::zeros((k, m));
        for mut row in atoms.rows_mut() {
            for v in row.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let norm = row.dot(&row).sqrt();
            row.mapv_inplace(|v| v / norm);
        }
        Self::from_atoms(atoms, schedule)
    }

    /// Build from explicit atoms (rows). Atoms are used as given.
    pub fn from_atoms(atoms: Array2<f64>, schedule: UpdateSchedule) -> Self {
        let (k, m) = atoms.dim();
        let mut d = Dictionary {
            gram: Array2::zeros((k, k)),
            atoms,
            b: Array2::zeros((k, m)),
            e: Array2::zeros((k, k)),
            s: 0.5,
            pending_ya: Array2::zeros((k, m)),
            pending_aa: Array2::zeros((k, k)),
            pending_n: 0,
            steps_since_update: 0,
            next_interval: schedule.initial,
            updates_done: 0,
            schedule,
        };
        d.refresh_gram();
        d
    }

    fn refresh_gram(&mut self) {
        self.gram = self.atoms.dot(&self.atoms.t());
    }

    pub fn input_dim(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn size(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn atom(&self, k: usize) -> ArrayView1<'_, f64> {
        self.atoms.row(k)
    }

    pub fn atoms(&self) -> &Array2<f64> {
        &self.atoms
    }

    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    pub fn correlation(&self) -> &Array2<f64> {
        &self.b
    }

    pub fn autocorrelation(&self) -> &Array2<f64> {
        &self.e
    }

    pub fn lambda_scale(&self) -> f64 {
        self.s
    }

    pub fn set_lambda_scale(&mut self, s: f64) {
        assert!(s > 0.0, "λ scale must be positive");
        self.s = s;
    }

    pub fn updates_done(&self) -> u64 {
        self.updates_done
    }

    pub fn next_interval(&self) -> u64 {
        self.next_interval
    }

    pub fn steps_since_update(&self) -> u64 {
        self.steps_since_update
    }

    pub fn pending_samples(&self) -> u64 {
        self.pending_n
    }

    /// Line-15 update of the running λ scale from one training encode.
    pub fn adapt_lambda_scale(&mut self, code: &SparseCode) {
        if !code.degenerate && code.lambda_ratio.is_finite() && code.lambda_ratio > 0.0 {
            self.s = 0.999 * self.s + 0.001 * code.lambda_ratio;
        }
    }

    /// Add one `(input, code)` pair to the pending batch statistics.
    pub fn accumulate(&mut self, y: &[f64], a: &[f64]) -> Result<()> {
        ensure_len("accumulate input", self.input_dim(), y.len())?;
        ensure_len("accumulate code", self.size(), a.len())?;
        let y = ArrayView1::from(y);
        let active: Vec<(usize, f64)> = a
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        for &(i, ai) in &active {
            self.pending_ya.row_mut(i).scaled_add(ai, &y);
            for &(j, aj) in &active {
                self.pending_aa[[i, j]] += ai * aj;
            }
        }
        self.pending_n += 1;
        Ok(())
    }

    /// Count one learning step; fires the block-coordinate-descent update
    /// when the current interval is complete. Returns whether it fired.
    pub fn end_step(&mut self) -> bool {
        self.steps_since_update += 1;
        if self.steps_since_update < self.next_interval {
            return false;
        }
        self.apply_update();
        self.steps_since_update = 0;
        self.next_interval = ((self.next_interval as f64) * self.schedule.growth)
            .round()
            .max(1.0) as u64;
        true
    }

    /// Single-sample convenience: accumulate and count one step.
    pub fn accumulate_and_maybe_update(&mut self, y: &[f64], code: &SparseCode) -> Result<bool> {
        self.accumulate(y, &code.a)?;
        Ok(self.end_step())
    }

    fn apply_update(&mut self) {
        if self.pending_n > 0 {
            let inv_n = 1.0 / self.pending_n as f64;
            if self.updates_done == 0 {
                self.b = &self.pending_ya * inv_n;
                self.e = &self.pending_aa * inv_n;
            } else {
                self.b
                    .zip_mut_with(&self.pending_ya, |b, &p| *b = 0.5 * (*b + p * inv_n));
                self.e
                    .zip_mut_with(&self.pending_aa, |e, &p| *e = 0.5 * (*e + p * inv_n));
            }
            let k = self.size();
            for i in 0..k {
                // D·E[:,i] with the current (partially updated) atoms.
                let mut de = Array1::<f64>::zeros(self.input_dim());
                for j in 0..k {
                    let w = self.e[[j, i]];
                    if w != 0.0 {
                        de.scaled_add(w, &self.atoms.row(j));
                    }
                }
                let denom = self.e[[i, i]] + GUARD;
                let mut col = self.atoms.row(i).to_owned();
                let prior = col.clone();
                col.zip_mut_with(&self.b.row(i), |c, &b| *c += b / denom);
                col.scaled_add(-1.0 / denom, &de);
                let norm = col.dot(&col).sqrt();
                if norm.is_finite() && norm > 1e-3 {
                    col.mapv_inplace(|v| v / norm);
                } else {
                    col = prior;
                }
                self.atoms.row_mut(i).assign(&col);
            }
            self.refresh_gram();
            self.updates_done += 1;
        }
        self.pending_ya.fill(0.0);
        self.pending_aa.fill(0.0);
        self.pending_n = 0;
    }

    /// Per-cell activation variance used by the normalization: `diag(E)`
    /// once an update has happened, else the pending batch's mean square.
    pub fn activation_variance(&self, i: usize) -> f64 {
        if self.updates_done > 0 {
            self.e[[i, i]]
        } else if self.pending_n > 0 && self.pending_aa[[i, i]] > 0.0 {
            self.pending_aa[[i, i]] / self.pending_n as f64
        } else {
            1.0
        }
    }

    pub(crate) fn raw_parts(&self) -> DictionaryParts<'_> {
        DictionaryParts {
            atoms: &self.atoms,
            b: &self.b,
            e: &self.e,
            s: self.s,
            pending_ya: &self.pending_ya,
            pending_aa: &self.pending_aa,
            pending_n: self.pending_n,
            steps_since_update: self.steps_since_update,
            next_interval: self.next_interval,
            updates_done: self.updates_done,
            schedule: self.schedule,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_raw(
        atoms: Array2<f64>,
        b: Array2<f64>,
        e: Array2<f64>,
        s: f64,
        pending_ya: Array2<f64>,
        pending_aa: Array2<f64>,
        pending_n: u64,
        steps_since_update: u64,
        next_interval: u64,
        updates_done: u64,
        schedule: UpdateSchedule,
    ) -> Self {
        let mut d = Dictionary {
            gram: Array2::zeros((atoms.nrows(), atoms.nrows())),
            atoms,
            b,
            e,
            s,
            pending_ya,
            pending_aa,
            pending_n,
            steps_since_update,
            next_interval,
            updates_done,
            schedule,
        };
        d.refresh_gram();
        d
    }
}

pub(crate) struct DictionaryParts<'a> {
    pub atoms: &'a Array2<f64>,
    pub b: &'a Array2<f64>,
    pub e: &'a Array2<f64>,
    pub s: f64,
    pub pending_ya: &'a Array2<f64>,
    pub pending_aa: &'a Array2<f64>,
    pub pending_n: u64,
    pub steps_since_update: u64,
    pub next_interval: u64,
    pub updates_done: u64,
    pub schedule: UpdateSchedule,
}

/// One coordinate-descent sweep of the nonnegative lasso at fixed λ.
///
/// `z` must hold `xD − aE` on entry and keeps that invariant. `on_update`
/// sees every coordinate change after it is applied. Returns the change in
/// the active count.
pub fn coordinate_sweep<F>(
    a: &mut [f64],
    z: &mut [f64],
    gram: &Array2<f64>,
    lambda: f64,
    mut on_update: F,
) -> isize
where
    F: FnMut(usize, &[f64], &[f64]),
{
    let k = a.len();
    let mut delta_active = 0isize;
    for i in 0..k {
        let old = a[i];
        let d = (old + z[i] - lambda).max(0.0) - old;
        if d != 0.0 {
            // Gram is symmetric, so row i equals column i and is contiguous.
            let col = gram.row(i);
            for (zj, &g) in z.iter_mut().zip(col.iter()) {
                *zj -= d * g;
            }
            let new = old + d;
            a[i] = new;
            match (old == 0.0, new == 0.0) {
                (true, false) => delta_active += 1,
                (false, true) => delta_active -= 1,
                _ => {}
            }
            on_update(i, a, z);
        }
    }
    delta_active
}

/// Adaptive sparse coding of one (already centered) input.
pub fn asc_encode(x: &[f64], dict: &Dictionary, params: &SimpleParams) -> Result<SparseCode> {
    ensure_len("asc input", dict.input_dim(), x.len())?;
    ensure_len("asc dictionary size", params.k, dict.size())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(PvmError::NonFinite("sparse coding input"));
    }
    let k = dict.size();
    let mut z: Vec<f64> = dict.atoms.dot(&ArrayView1::from(x)).to_vec();
    let z_peak = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if z_peak <= DEGENERATE_PEAK {
        return Ok(SparseCode {
            a: vec![0.0; k],
            lambda_final: dict.s * f64::EPSILON,
            iterations_used: 0,
            lambda_ratio: dict.s,
            degenerate: true,
        });
    }
    let mut a = vec![0.0; k];
    let mut lambda = z_peak * dict.s;
    let mut active = 0isize;
    let target = params.n as isize;
    let mut t = 1usize;
    while active != target && t <= params.t_max {
        active += coordinate_sweep(&mut a, &mut z, &dict.gram, lambda, |_, _, _| {});
        let tf = t as f64;
        lambda *= if active > target {
            1.0 + 2.0 / tf
        } else {
            1.0 - 0.75 / tf
        };
        t += 1;
    }
    Ok(SparseCode {
        a,
        lambda_final: lambda,
        iterations_used: t - 1,
        lambda_ratio: lambda / z_peak,
        degenerate: false,
    })
}

/// `D·a`.
pub fn reconstruct(code: &[f64], dict: &Dictionary) -> Result<Vec<f64>> {
    ensure_len("reconstruct code", dict.size(), code.len())?;
    let mut out = Array1::<f64>::zeros(dict.input_dim());
    for (k, &ak) in code.iter().enumerate() {
        if ak != 0.0 {
            out.scaled_add(ak, &dict.atoms.row(k));
        }
    }
    Ok(out.to_vec())
}

/// Divide each activation by its RMS and append the constant cell.
pub fn normalize_simple(a: &[f64], dict: &Dictionary) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + 1);
    for (i, &ai) in a.iter().enumerate() {
        out.push(if ai == 0.0 {
            0.0
        } else {
            ai / (dict.activation_variance(i).sqrt() + GUARD)
        });
    }
    out.push(1.0);
    out
}

/// Squared reconstruction error `‖x − Da‖²`.
pub fn reconstruction_error(x: &[f64], a: &[f64], dict: &Dictionary) -> Result<f64> {
    let r = reconstruct(a, dict)?;
    Ok(x.iter().zip(&r).map(|(xi, ri)| (xi - ri).powi(2)).sum())
}

/// Column norms of `D` (for invariant checks).
pub fn atom_norms(dict: &Dictionary) -> Vec<f64> {
    dict.atoms
        .axis_iter(Axis(0))
        .map(|r| r.dot(&r).sqrt())
        .collect()
}
