//! Stimulus optimization: maximize a cell's selectivity over a PCA basis of
//! training frames.

use serde::Serialize;

use super::nelder_mead::{maximize, NelderMeadOptions};
use super::pca::{vector_frame, PcaBasis};
use super::selectivity::still_selectivity;
use super::CellRef;
use crate::error::Result;
use crate::hierarchy::ModelState;
use crate::ingest::RawFrame;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizedStimulus {
    #[serde(skip)]
    pub image: RawFrame,
    pub coefficients: Vec<f64>,
    pub s: f64,
    pub s_init: f64,
    pub iterations: usize,
}

/// Nelder-Mead over basis coefficients, started at the projection of
/// `init`. Each candidate image is clipped to `[0, 255]` and presented to the
/// frozen model as a still.
pub fn optimize_stimulus(
    model: &mut ModelState,
    cell: CellRef,
    basis: &PcaBasis,
    init: &RawFrame,
    settle: usize,
    opts: &NelderMeadOptions,
) -> Result<OptimizedStimulus> {
    cell.validate(model)?;
    let (w, h) = (init.width, init.height);
    let x0 = basis.project(&super::pca::frame_vector(init));
    let mut failure = None;
    let mut objective = |v: &[f64]| -> f64 {
        let frame = match vector_frame(&basis.reconstruct(v), w, h) {
            Ok(f) => f,
            Err(e) => {
                failure.get_or_insert(e);
                return f64::NAN;
            }
        };
        match still_selectivity(model, &frame, cell, settle) {
            Ok(s) => s,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let s_init = objective(&x0);
    let r = maximize(&mut objective, &x0, opts);
    if let Some(e) = failure {
        return Err(e);
    }
    let image = vector_frame(&basis.reconstruct(&r.x), w, h)?;
    model.reset_dynamics();
    Ok(OptimizedStimulus {
        image,
        coefficients: r.x,
        s: r.f,
        s_init,
        iterations: r.iterations,
    })
}
