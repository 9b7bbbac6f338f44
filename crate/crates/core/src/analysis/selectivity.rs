//! Selectivity `s_i = a_i / Σ a` and the search for the frames that drive a
//! cell most selectively.

use serde::Serialize;

use super::CellRef;
use crate::error::Result;
use crate::hierarchy::ModelState;
use crate::ingest::RawFrame;

/// `a[cell] / Σ a`, or `None` when the layer is silent.
pub fn selectivity(activations: &[f64], cell: usize) -> Option<f64> {
    let sum: f64 = activations.iter().sum();
    if sum > 0.0 {
        Some(activations[cell] / sum)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectivityHit {
    pub index: usize,
    pub s: f64,
    #[serde(skip)]
    pub frame: RawFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectivitySearch {
    pub evaluated: usize,
    pub skipped: usize,
    pub top: Vec<SelectivityHit>,
}

/// Run the frozen model over the stream and record `s` on every
/// `stride`-th frame, keeping the `top` most selective.
pub fn selectivity_search<I>(
    model: &mut ModelState,
    frames: I,
    cell: CellRef,
    stride: usize,
    top: usize,
) -> Result<SelectivitySearch>
where
    I: IntoIterator<Item = Result<RawFrame>>,
{
    cell.validate(model)?;
    let stride = stride.max(1);
    model.reset_dynamics();
    let mut hits: Vec<SelectivityHit> = Vec::new();
    let (mut evaluated, mut skipped) = (0, 0);
    let per_input = model.spec.frames_per_input;
    let mut window = crate::ingest::FrameWindow::new(per_input);
    for (i, f) in frames.into_iter().enumerate() {
        let f = f?;
        let Some(w) = window.push(f.clone()) else {
            continue;
        };
        model.present(&w, false)?;
        if i % stride != 0 {
            continue;
        }
        evaluated += 1;
        match selectivity(cell.read(model), cell.cell) {
            Some(s) => hits.push(SelectivityHit {
                index: i,
                s,
                frame: f,
            }),
            None => skipped += 1,
        }
    }
    hits.sort_by(|a, b| b.s.total_cmp(&a.s).then(a.index.cmp(&b.index)));
    hits.truncate(top);
    Ok(SelectivitySearch {
        evaluated,
        skipped,
        top: hits,
    })
}

/// Selectivity of a cell after settling the frozen model on a still image.
pub fn still_selectivity(
    model: &mut ModelState,
    frame: &RawFrame,
    cell: CellRef,
    settle: usize,
) -> Result<f64> {
    crate::readout::settle_on(model, frame, settle)?;
    Ok(selectivity(cell.read(model), cell.cell).unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectivity_bounds() {
        assert_eq!(selectivity(&[0.0, 1.0, 0.0], 1), Some(1.0));
        assert_eq!(selectivity(&[2.0; 4], 0), Some(0.25));
        assert_eq!(selectivity(&[0.0; 4], 0), None);
    }
}
