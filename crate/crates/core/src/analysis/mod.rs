//! Receptive-field and response characterization of a frozen model.

pub mod nelder_mead;
pub mod optimize;
pub mod pca;
pub mod render;
pub mod selectivity;
pub mod stability;
pub mod stc;
pub mod tuning;

use serde::{Deserialize, Serialize};

use crate::error::{PvmError, Result};
use crate::hierarchy::{Layer, ModelState};

/// One cell of one tile of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRef {
    pub level: usize,
    pub layer: Layer,
    pub tile: usize,
    pub cell: usize,
}

impl CellRef {
    pub fn validate(&self, model: &ModelState) -> Result<()> {
        if self.level >= model.num_levels() {
            return Err(PvmError::InvalidArgument(format!(
                "level {} out of range (model has {})",
                self.level + 1,
                model.num_levels()
            )));
        }
        let l = &model.spec.levels[self.level];
        if self.tile >= l.tile_count() {
            return Err(PvmError::InvalidArgument(format!(
                "tile {} out of range ({} tiles)",
                self.tile,
                l.tile_count()
            )));
        }
        let cells = match self.layer {
            Layer::Simple => l.simple.k,
            Layer::Complex => l.cells(),
        };
        if self.cell >= cells {
            return Err(PvmError::InvalidArgument(format!(
                "cell {} out of range ({cells} cells)",
                self.cell
            )));
        }
        Ok(())
    }

    /// The layer's activation vector for this cell's tile.
    pub fn read<'a>(&self, model: &'a ModelState) -> &'a [f64] {
        model.activations(self.level, self.layer)[self.tile]
    }
}

/// How "contributes most" is ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Ranking {
    #[default]
    Signed,
    Absolute,
}

/// Indices of the `n` largest entries (by `ranking`), ties to the lower
/// index.
pub fn top_indices(values: &[f64], n: usize, ranking: Ranking) -> Vec<(usize, f64)> {
    let key = |v: f64| match ranking {
        Ranking::Signed => v,
        Ranking::Absolute => v.abs(),
    };
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| key(values[b]).total_cmp(&key(values[a])).then(a.cmp(&b)));
    idx.into_iter().take(n).map(|i| (i, values[i])).collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_breaks_ties_low() {
        let v = [1.0, 3.0, 3.0, -5.0];
        assert_eq!(
            top_indices(&v, 2, Ranking::Signed),
            vec![(1, 3.0), (2, 3.0)]
        );
        assert_eq!(top_indices(&v, 1, Ranking::Absolute), vec![(3, -5.0)]);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), Some(2.5));
    }
}
