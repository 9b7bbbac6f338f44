//! Phase modulation under drifting gratings: how much a cell's response
//! swings over a grating cycle at its preferred orientation and period.

use std::f64::consts::PI;

use serde::Serialize;

use super::median;
use crate::error::{PvmError, Result};
use crate::hierarchy::{Layer, ModelState};
use crate::stimuli::grating_frame;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuningOptions {
    pub orientations: usize,
    pub periods: Vec<f64>,
    /// Frames per grating cycle.
    pub phase_steps: usize,
    /// Cycles shown before the recorded one.
    pub warmup_cycles: usize,
    pub amplitude: f64,
}

impl Default for TuningOptions {
    fn default() -> Self {
        TuningOptions {
            orientations: 8,
            periods: vec![4.0, 6.0, 8.0, 12.0],
            phase_steps: 16,
            warmup_cycles: 1,
            amplitude: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationReport {
    pub level: usize,
    /// Per responsive cell, `(max − min)/(max + min)` over the recorded cycle.
    pub simple: Vec<f64>,
    pub complex: Vec<f64>,
    pub median_simple: Option<f64>,
    pub median_complex: Option<f64>,
}

/// Responses over one recorded cycle per grating, indexed
/// `[grating][phase][tile][cell]` for both layers.
type Sweep = Vec<Vec<Vec<Vec<f64>>>>;

fn sweep(model: &mut ModelState, level: usize, opts: &TuningOptions) -> Result<(Sweep, Sweep)> {
    let size = model.spec.field_size;
    let per_input = model.spec.frames_per_input;
    let mut simple = Vec::new();
    let mut complex = Vec::new();
    for o in 0..opts.orientations {
        let theta = PI * o as f64 / opts.orientations as f64;
        for &period in &opts.periods {
            model.reset_dynamics();
            let mut window = crate::ingest::FrameWindow::new(per_input);
            let total = (opts.warmup_cycles + 1) * opts.phase_steps + per_input - 1;
            let mut s_cycle = Vec::new();
            let mut c_cycle = Vec::new();
            for t in 0..total {
                let phase = 2.0 * PI * t as f64 / opts.phase_steps as f64;
                let f = grating_frame(size, theta, period, phase, [1.0; 3], opts.amplitude);
                let Some(w) = window.push(f) else { continue };
                model.present(&w, false)?;
                if t + opts.phase_steps >= total {
                    let grab = |layer| -> Vec<Vec<f64>> {
                        model
                            .activations(level, layer)
                            .into_iter()
                            .map(|a| a.to_vec())
                            .collect()
                    };
                    s_cycle.push(grab(Layer::Simple));
                    c_cycle.push(grab(Layer::Complex));
                }
            }
            simple.push(s_cycle);
            complex.push(c_cycle);
        }
    }
    model.reset_dynamics();
    Ok((simple, complex))
}

/// Modulation of each responsive cell at its best grating (largest mean
/// response over the cycle). `cells` limits the cell index range.
fn modulation(sweep: &Sweep, cells: usize) -> Vec<f64> {
    let tiles = sweep[0][0].len();
    let mut out = Vec::new();
    for t in 0..tiles {
        for i in 0..cells {
            let mut best: Option<(f64, usize)> = None;
            for (g, cycle) in sweep.iter().enumerate() {
                let mean = cycle.iter().map(|p| p[t][i]).sum::<f64>() / cycle.len() as f64;
                if mean > 0.0 && best.is_none_or(|(m, _)| mean > m) {
                    best = Some((mean, g));
                }
            }
            if let Some((_, g)) = best {
                let r: Vec<f64> = sweep[g].iter().map(|p| p[t][i]).collect();
                let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
                if hi + lo > 0.0 {
                    out.push((hi - lo) / (hi + lo));
                }
            }
        }
    }
    out
}

/// Phase-modulation indices of one level's Simple and Complex cells
/// (constant cell excluded). Frozen.
pub fn phase_modulation(
    model: &mut ModelState,
    level: usize,
    opts: &TuningOptions,
) -> Result<ModulationReport> {
    if level >= model.num_levels() {
        return Err(PvmError::InvalidArgument(format!(
            "level {} out of range",
            level + 1
        )));
    }
    if opts.orientations == 0 || opts.periods.is_empty() || opts.phase_steps < 2 {
        return Err(PvmError::InvalidArgument("empty grating sweep".into()));
    }
    let k = model.spec.levels[level].simple.k;
    let (s, c) = sweep(model, level, opts)?;
    let simple = modulation(&s, k);
    let complex = modulation(&c, k);
    Ok(ModulationReport {
        level,
        median_simple: median(&simple),
        median_complex: median(&complex),
        simple,
        complex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulation_index_extremes() {
        // One tile, two cells, one grating, four phases.
        let sweep: Sweep = vec![vec![
            vec![vec![1.0, 1.0]],
            vec![vec![0.0, 1.0]],
            vec![vec![0.0, 1.0]],
            vec![vec![0.0, 1.0]],
        ]];
        assert_eq!(modulation(&sweep, 2), vec![1.0, 0.0]);
    }
}
