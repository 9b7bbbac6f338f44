//! Spike-triggered covariance under uniform white noise.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PvmError, Result};
use crate::hierarchy::{Layer, ModelState};
use crate::ingest::GRAY_LEVEL;
use crate::predictive::{assemble_context, complex_activate, normalize_complex, ComplexState};
use crate::sparse_coding::{asc_encode, normalize_simple};

const BATCH: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StcResult {
    /// Full spectrum, descending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors of the five largest eigenvalues, largest first.
    pub excitatory: Vec<Vec<f64>>,
    /// Eigenvectors of the three smallest eigenvalues, smallest first.
    pub suppressive: Vec<Vec<f64>>,
    pub frames: usize,
    pub total_response: f64,
    /// `Σ c x xᵀ / Σ c`, kept for checks.
    #[serde(skip)]
    pub covariance: Array2<f64>,
}

/// Centered i.i.d. uniform noise batch `n × dim` from `(seed, batch)`.
pub fn noise_batch(dim: usize, n: usize, seed: u64, batch: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ batch.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    Array2::from_shape_fn((n, dim), |_| {
        rng.random_range(0..=255u8) as f64 - GRAY_LEVEL
    })
}

/// Response-weighted stimulus covariance, without removing the
/// spike-triggered average. `response` maps a batch of stimuli (rows) to
/// one nonnegative response per row; batches are independent, so results
/// do not depend on the thread count.
pub fn stc_generic<F>(dim: usize, frames: usize, seed: u64, response: F) -> Result<StcResult>
where
    F: Fn(&Array2<f64>) -> Result<Vec<f64>> + Sync,
{
    let batches = frames.div_ceil(BATCH);
    let parts = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH.min(frames - b * BATCH);
            let x = noise_batch(dim, n, seed, b as u64);
            let c = Array1::from(response(&x)?);
            if c.iter().any(|v| !v.is_finite()) {
                return Err(PvmError::NonFinite("stc response"));
            }
            let weighted = &x * &c.view().insert_axis(Axis(1));
            Ok((weighted.t().dot(&x), c.sum()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sigma = Array2::<f64>::zeros((dim, dim));
    let mut total = 0.0;
    for (s, w) in parts {
        sigma += &s;
        total += w;
    }
    if total <= 0.0 {
        return Err(PvmError::Numeric(
            "all responses are zero; nothing to trigger on".into(),
        ));
    }
    sigma /= total;
    // Exact symmetry despite summation order.
    let sym = (&sigma + &sigma.t()) * 0.5;
    let (eigenvalues, vectors) = symmetric_eigen_desc(&sym);
    let excitatory = vectors.iter().take(5).cloned().collect();
    let suppressive = vectors.iter().rev().take(3).cloned().collect();
    Ok(StcResult {
        eigenvalues,
        excitatory,
        suppressive,
        frames,
        total_response: total,
        covariance: sym,
    })
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue.
pub fn symmetric_eigen_desc(m: &Array2<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

/// Responses of one first-level tile to a batch of independent stimuli
/// presented in sequence: Simple code, then Complex output with the
/// tile's own previous output as the only context. Frozen.
pub fn tile_responses(
    model: &ModelState,
    tile: usize,
    layer: Layer,
    stimuli: &Array2<f64>,
) -> Result<Vec<Vec<f64>>> {
    let spec = &model.spec.levels[0];
    let level = &model.levels[0];
    let feedback_dim = level.weights.context_dim() - 6 * spec.cells();
    let mut state: ComplexState = level.tiles[tile].complex.clone();
    let mut prev = vec![0.0; spec.cells()];
    let mut out = Vec::with_capacity(stimuli.nrows());
    for row in stimuli.rows() {
        let x = row.to_vec();
        let code = asc_encode(&x, &level.dictionary, &spec.simple)?;
        let a = normalize_simple(&code.a, &level.dictionary);
        match layer {
            Layer::Simple => out.push(a[..spec.simple.k].to_vec()),
            Layer::Complex => {
                let p0 = assemble_context(&a, &prev, [None; 4], None, feedback_dim)?;
                let c0 = complex_activate(&p0, &level.weights)?;
                let c =
                    normalize_complex(&c0, &mut state, level.weights.t, false, &model.spec.complex);
                prev = c.clone();
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// STC of one cell of a first-level tile.
pub fn stc_analysis(
    model: &ModelState,
    tile: usize,
    layer: Layer,
    cell: usize,
    frames: usize,
    seed: u64,
) -> Result<StcResult> {
    let cref = super::CellRef {
        level: 0,
        layer,
        tile,
        cell,
    };
    cref.validate(model)?;
    let dim = model.spec.levels[0].input_dim;
    stc_generic(dim, frames, seed, |x| {
        Ok(tile_responses(model, tile, layer, x)?
            .into_iter()
            .map(|r| r[cell])
            .collect())
    })
}

/// Absolute cosine between two vectors.
pub fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_response_gives_raw_covariance() {
        let r = stc_generic(4, 20000, 3, |x| Ok(vec![1.0; x.nrows()])).unwrap();
        // Var of a discrete uniform on 0..=255 is (256² − 1)/12.
        let var = (256.0f64 * 256.0 - 1.0) / 12.0;
        for &e in &r.eigenvalues {
            assert!((e / var - 1.0).abs() < 0.05, "{e}");
        }
        assert!(stc_generic(4, 100, 3, |x| Ok(vec![0.0; x.nrows()])).is_err());
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let r = stc_generic(10, 4000, 1, |x| {
            Ok(x.rows().into_iter().map(|v| v[0].max(0.0)).collect())
        })
        .unwrap();
        let all: Vec<&Vec<f64>> = r.excitatory.iter().chain(&r.suppressive).collect();
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let d: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-6);
            }
        }
    }
}
