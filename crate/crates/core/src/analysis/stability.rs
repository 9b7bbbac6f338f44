//! Linearized stability of the Complex recurrence.
//!
//! Holding the input fixed, a level's output at `t + 1` depends on its own
//! outputs at `t` through the recurrent and lateral blocks, and on its
//! parent's outputs at `t` through the feedback block. The parent never
//! reads its children's Complex outputs, so the joint Jacobian is block
//! triangular by level and its spectrum is the union of the per-level
//! blocks computed here.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{PvmError, Result};
use crate::hierarchy::{ContextMode, ModelState};
use crate::ingest::RawFrame;
use crate::predictive::{ComplexWeights, Direction, BLOCK_LATERAL, BLOCK_RECURRENT};
use crate::sparse_coding::GUARD;

/// Dense eigenanalysis is refused above this many state variables.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStability {
    pub level: usize,
    pub dim: usize,
    pub max_real: f64,
    pub spectral_radius: f64,
    /// `(re, im)` pairs, sorted by decreasing real part.
    pub eigenvalues: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub probe_frames: usize,
    pub levels: Vec<LevelStability>,
}

impl StabilityReport {
    pub fn max_real(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.max_real)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Jacobian of one level's output map at an operating point. `gate[t][i]`
/// is the (fractional) rectifier state and `v[t][i]` the running variance
/// of cell `i` in tile `t`. Rows and columns index `(tile, cell)`.
pub fn level_jacobian(
    weights: &ComplexWeights,
    tiles_x: usize,
    tiles_y: usize,
    gate: &[Vec<f64>],
    v: &[Vec<f64>],
    lateral: bool,
) -> DMatrix<f64> {
    let j = weights.cells();
    let n = tiles_x * tiles_y * j;
    let mut m = DMatrix::zeros(n, n);
    let rec = weights.block(BLOCK_RECURRENT);
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let t = ty * tiles_x + tx;
            let mut sources = vec![(t, rec)];
            if lateral {
                for dir in Direction::ALL {
                    let (dx, dy) = dir.offset();
                    let (nx, ny) = (tx as isize + dx, ty as isize + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < tiles_x && (ny as usize) < tiles_y {
                        let src = ny as usize * tiles_x + nx as usize;
                        sources.push((src, weights.block(BLOCK_LATERAL + dir as usize)));
                    }
                }
            }
            for i in 0..j {
                let g = gate[t][i] / (v[t][i].sqrt() + GUARD);
                if g == 0.0 {
                    continue;
                }
                for (src, block) in &sources {
                    for k in 0..j {
                        m[(t * j + i, src * j + k)] += g * block[[k, i]];
                    }
                }
            }
        }
    }
    m
}

pub fn eigen_summary(level: usize, m: DMatrix<f64>) -> LevelStability {
    let dim = m.nrows();
    let mut eig: Vec<(f64, f64)> = if dim == 0 {
        Vec::new()
    } else {
        m.complex_eigenvalues()
            .iter()
            .map(|c| (c.re, c.im))
            .collect()
    };
    eig.sort_by(|a, b| b.0.total_cmp(&a.0));
    LevelStability {
        level,
        dim,
        max_real: eig.first().map_or(0.0, |e| e.0),
        spectral_radius: eig.iter().map(|e| e.0.hypot(e.1)).fold(0.0, f64::max),
        eigenvalues: eig,
    }
}

/// Run the frozen model over `probe`, take each cell's fraction of active
/// steps as its gate, and analyze every level.
pub fn stability_report(model: &mut ModelState, probe: &[RawFrame]) -> Result<StabilityReport> {
    if probe.is_empty() {
        return Err(PvmError::EmptyStream);
    }
    for (i, l) in model.spec.levels.iter().enumerate() {
        let n = l.tile_count() * l.cells();
        if n > DENSE_LIMIT {
            return Err(PvmError::InvalidArgument(format!(
                "level {} has {n} state variables; dense eigenanalysis is limited to {DENSE_LIMIT}",
                i + 1
            )));
        }
    }
    model.reset_dynamics();
    let mut active: Vec<Vec<Vec<f64>>> = model
        .levels
        .iter()
        .map(|l| vec![vec![0.0; l.weights.cells()]; l.tiles.len()])
        .collect();
    let mut window = crate::ingest::FrameWindow::new(model.spec.frames_per_input);
    let mut steps = 0usize;
    for f in probe {
        let Some(w) = window.push(f.clone()) else {
            continue;
        };
        model.present(&w, false)?;
        steps += 1;
        for (l, acc) in active.iter_mut().enumerate() {
            for (t, cells) in acc.iter_mut().enumerate() {
                for (i, c) in model.complex_output(l, t).iter().enumerate() {
                    if *c > 0.0 {
                        cells[i] += 1.0;
                    }
                }
            }
        }
    }
    model.reset_dynamics();
    let steps = steps.max(1) as f64;
    let lateral = model.spec.context == ContextMode::Full;
    let levels = model
        .levels
        .iter()
        .zip(&model.spec.levels)
        .zip(&active)
        .enumerate()
        .map(|(li, ((state, spec), acc))| {
            let gate: Vec<Vec<f64>> = acc
                .iter()
                .map(|cells| cells.iter().map(|c| c / steps).collect())
                .collect();
            let v: Vec<Vec<f64>> = state.tiles.iter().map(|t| t.complex.v.clone()).collect();
            let m = level_jacobian(
                &state.weights,
                spec.tiles_x,
                spec.tiles_y,
                &gate,
                &v,
                lateral,
            );
            eigen_summary(li, m)
        })
        .collect();
    Ok(StabilityReport {
        probe_frames: probe.len(),
        levels,
    })
}
