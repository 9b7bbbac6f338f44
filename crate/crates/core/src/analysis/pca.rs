//! Principal components of frame vectors.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::stc::symmetric_eigen_desc;
use crate::error::{PvmError, Result};
use crate::ingest::RawFrame;

/// Above this dimension the covariance is not formed explicitly.
pub const EXACT_LIMIT: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub mean: Array1<f64>,
    /// Orthonormal components as rows, by decreasing variance.
    pub components: Array2<f64>,
    pub variances: Vec<f64>,
}

impl PcaBasis {
    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let centered = &ndarray::ArrayView1::from(x) - &self.mean;
        self.components.dot(&centered).to_vec()
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        (&self.mean + &self.components.t().dot(&ndarray::ArrayView1::from(coeffs))).to_vec()
    }
}

pub fn frame_vector(f: &RawFrame) -> Vec<f64> {
    f.data.iter().map(|&b| b as f64).collect()
}

/// Frame from a vector of channel values, clipped to `[0, 255]`.
pub fn vector_frame(v: &[f64], width: usize, height: usize) -> Result<RawFrame> {
    RawFrame::new(
        width,
        height,
        v.iter()
            .map(|x| x.round().clamp(0.0, 255.0) as u8)
            .collect(),
    )
}

fn orthonormalize(m: &Array2<f64>) -> Array2<f64> {
    let dm = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]]);
    let q = dm.qr().q();
    Array2::from_shape_fn((q.nrows(), q.ncols()), |(i, j)| q[(i, j)])
}

/// Top `k` components of the samples (rows). Exact eigendecomposition of
/// the covariance for small dimensions, randomized subspace iteration
/// otherwise.
pub fn pca_basis(samples: &[Vec<f64>], k: usize, seed: u64) -> Result<PcaBasis> {
    let n = samples.len();
    if n < 2 {
        return Err(PvmError::InvalidArgument(
            "PCA needs at least two samples".into(),
        ));
    }
    let d = samples[0].len();
    let k = k.min(d).min(n);
    if k == 0 {
        return Err(PvmError::InvalidArgument(
            "PCA basis dimension is zero".into(),
        ));
    }
    let x = Array2::from_shape_fn((n, d), |(i, j)| samples[i][j]);
    let mean = x.mean_axis(Axis(0)).expect("n > 0");
    let xc = &x - &mean.view().insert_axis(Axis(0));
    let scale = 1.0 / (n - 1) as f64;
    if d <= EXACT_LIMIT {
        let cov = xc.t().dot(&xc) * scale;
        let (values, vectors) = symmetric_eigen_desc(&cov);
        let components = Array2::from_shape_fn((k, d), |(i, j)| vectors[i][j]);
        return Ok(PcaBasis {
            mean,
            components,
            variances: values[..k].to_vec(),
        });
    }
    let width = (k + 10).min(d).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Array2::from_shape_fn((d, width), |_| StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(&xc.dot(&omega));
    for _ in 0..4 {
        let z = orthonormalize(&xc.t().dot(&q));
        q = orthonormalize(&xc.dot(&z));
    }
    // B = Qᵀ Xc is small; its right singular vectors are the components.
    let b = q.t().dot(&xc);
    let (values, vectors) = symmetric_eigen_desc(&b.dot(&b.t()));
    let mut components = Array2::zeros((k, d));
    let mut variances = Vec::with_capacity(k);
    for i in 0..k {
        let u = Array1::from(vectors[i].clone());
        let mut c = b.t().dot(&u);
        let norm = c.dot(&c).sqrt();
        if norm > 0.0 {
            c /= norm;
        }
        components.row_mut(i).assign(&c);
        variances.push(values[i].max(0.0) * scale);
    }
    Ok(PcaBasis {
        mean,
        components,
        variances,
    })
}
