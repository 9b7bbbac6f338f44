//! Supervised readouts over a frozen hierarchy: a tanh perceptron object
//! classifier shared across tiles, and per-level linear heatmap regressors
//! for tracking.

use ndarray::{Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{ByteReader, ByteWriter};
use crate::error::{ensure_len, PvmError, Result};
use crate::hierarchy::{Layer, ModelState};
use crate::ingest::RawFrame;
use crate::tracker::BoundingBox;

/// Which layer of which level to read out (0-based level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSelector {
    pub level: usize,
    pub layer: Layer,
}

impl LayerSelector {
    /// All layers bottom-up: level 1 Simple, level 1 Complex, level 2 Simple, ...
    pub fn all(levels: usize) -> Vec<LayerSelector> {
        (0..levels)
            .flat_map(|level| {
                [Layer::Simple, Layer::Complex]
                    .into_iter()
                    .map(move |layer| LayerSelector { level, layer })
            })
            .collect()
    }

    pub fn name(&self) -> String {
        let l = match self.layer {
            Layer::Simple => "S",
            Layer::Complex => "C",
        };
        format!("V{}{}", self.level + 1, l)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledActivationSet {
    pub dim: usize,
    pub num_classes: usize,
    pub examples: Vec<(Vec<f64>, usize)>,
}

impl LabeledActivationSet {
    pub fn new(dim: usize, num_classes: usize) -> Self {
        LabeledActivationSet {
            dim,
            num_classes,
            examples: Vec::new(),
        }
    }

    pub fn push(&mut self, x: Vec<f64>, label: usize) -> Result<()> {
        ensure_len("activation example", self.dim, x.len())?;
        if label >= self.num_classes {
            return Err(PvmError::InvalidArgument(format!(
                "label {label} out of range for {} classes",
                self.num_classes
            )));
        }
        self.examples.push((x, label));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    fn classes_present(&self) -> usize {
        let mut seen = vec![false; self.num_classes];
        for (_, l) in &self.examples {
            seen[*l] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }
}

/// Present a static image for `settle` frozen steps after clearing the
/// model's dynamics.
pub fn settle_on(model: &mut ModelState, frame: &RawFrame, settle: usize) -> Result<()> {
    model.reset_dynamics();
    let window = vec![frame.clone(); model.spec.frames_per_input];
    for _ in 0..settle.max(1) {
        model.present(&window, false)?;
    }
    Ok(())
}

/// Per-tile activation vectors of the selected layer, one example per tile
/// per stimulus. Never mutates weights.
pub fn collect_activations(
    model: &mut ModelState,
    stimuli: &[(RawFrame, usize)],
    num_classes: usize,
    selector: LayerSelector,
    settle: usize,
) -> Result<LabeledActivationSet> {
    if selector.level >= model.num_levels() {
        return Err(PvmError::InvalidArgument(format!(
            "level {} out of range (model has {})",
            selector.level + 1,
            model.num_levels()
        )));
    }
    let l = &model.spec.levels[selector.level];
    let dim = match selector.layer {
        Layer::Simple => l.simple.k,
        Layer::Complex => l.cells(),
    };
    let mut set = LabeledActivationSet::new(dim, num_classes);
    for (frame, label) in stimuli {
        settle_on(model, frame, settle)?;
        for a in model.activations(selector.level, selector.layer) {
            set.push(a.to_vec(), *label)?;
        }
    }
    Ok(set)
}

/// Collect every layer at once (one settle per stimulus).
pub fn collect_all_layers(
    model: &mut ModelState,
    stimuli: &[(RawFrame, usize)],
    num_classes: usize,
    settle: usize,
) -> Result<Vec<(LayerSelector, LabeledActivationSet)>> {
    let selectors = LayerSelector::all(model.num_levels());
    let mut sets: Vec<LabeledActivationSet> = selectors
        .iter()
        .map(|s| {
            let l = &model.spec.levels[s.level];
            let dim = match s.layer {
                Layer::Simple => l.simple.k,
                Layer::Complex => l.cells(),
            };
            LabeledActivationSet::new(dim, num_classes)
        })
        .collect();
    for (frame, label) in stimuli {
        settle_on(model, frame, settle)?;
        for (s, set) in selectors.iter().zip(sets.iter_mut()) {
            for a in model.activations(s.level, s.layer) {
                set.push(a.to_vec(), *label)?;
            }
        }
    }
    Ok(selectors.into_iter().zip(sets).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub rate: f64,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            epochs: 20,
            rate: 0.01,
            seed: 0,
        }
    }
}

/// One-vs-all single-layer perceptron with tanh outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronClassifier {
    /// `dim × classes`.
    pub w: Array2<f64>,
    pub bias: Vec<f64>,
    /// Per-feature input multiplier (inverse training RMS); keeps tanh out
    /// of saturation when some cells respond far above unit scale.
    pub input_scale: Vec<f64>,
}

impl PerceptronClassifier {
    /// Small uniform random weights in `±1/√dim`.
    pub fn random(dim: usize, classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (dim.max(1) as f64).sqrt();
        let w = Array2::from_shape_fn((dim, classes), |_| rng.random_range(-bound..bound));
        PerceptronClassifier {
            w,
            bias: vec![0.0; classes],
            input_scale: vec![1.0; dim],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.w.ncols()
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    fn pre_activation(&self, x: &[f64]) -> Array1<f64> {
        let mut z = Array1::from(self.bias.clone());
        for ((i, &xi), &s) in x.iter().enumerate().zip(&self.input_scale) {
            if xi != 0.0 {
                z.scaled_add(xi * s, &self.w.row(i));
            }
        }
        z
    }

    /// `tanh(Wᵀx + b)` and its argmax (lowest index wins ties).
    pub fn classify(&self, x: &[f64]) -> Result<(Vec<f64>, usize)> {
        ensure_len("classifier input", self.dim(), x.len())?;
        let scores: Vec<f64> = self.pre_activation(x).iter().map(|v| v.tanh()).collect();
        Ok((scores.clone(), argmax(&scores)))
    }

    pub fn accuracy(&self, data: &LabeledActivationSet) -> Result<f64> {
        if data.is_empty() {
            return Err(PvmError::InvalidArgument("empty evaluation set".into()));
        }
        let hits = data
            .examples
            .par_iter()
            .map(|(x, l)| self.classify(x).map(|(_, p)| (p == *l) as usize))
            .sum::<Result<usize>>()?;
        Ok(hits as f64 / data.len() as f64)
    }

    pub fn to_chunk(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.matrix(&self.w);
        w.f64s(&self.bias);
        w.f64s(&self.input_scale);
        w.finish()
    }

    pub fn from_chunk(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes, "classifier chunk");
        let w = r.matrix()?;
        let bias = r.f64s()?;
        let input_scale = r.f64s()?;
        ensure_len("classifier bias", w.ncols(), bias.len())?;
        ensure_len("classifier input scale", w.nrows(), input_scale.len())?;
        Ok(PerceptronClassifier {
            w,
            bias,
            input_scale,
        })
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn inverse_rms(data: &LabeledActivationSet) -> Vec<f64> {
    let mut sq = vec![0.0; data.dim];
    for (x, _) in &data.examples {
        for (s, v) in sq.iter_mut().zip(x) {
            *s += v * v;
        }
    }
    let n = data.len().max(1) as f64;
    sq.iter()
        .map(|&s| {
            let rms = (s / n).sqrt();
            if rms > 0.0 {
                1.0 / rms
            } else {
                1.0
            }
        })
        .collect()
}

/// SGD on squared error against ±1 one-vs-all targets, on inputs scaled to
/// unit RMS per feature.
pub fn train_classifier(
    data: &LabeledActivationSet,
    config: &ClassifierConfig,
) -> Result<PerceptronClassifier> {
    if data.classes_present() < 2 {
        return Err(PvmError::InvalidArgument(
            "classifier training needs at least two classes".into(),
        ));
    }
    let mut clf = PerceptronClassifier::random(data.dim, data.num_classes, config.seed);
    clf.input_scale = inverse_rms(data);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, label) = &data.examples[i];
            let z = clf.pre_activation(x);
            // d(½(y − t)²)/dz = (y − t)(1 − y²)
            let delta: Vec<f64> = z
                .iter()
                .enumerate()
                .map(|(c, &zc)| {
                    let y = zc.tanh();
                    let target = if c == *label { 1.0 } else { -1.0 };
                    (y - target) * (1.0 - y * y)
                })
                .collect();
            let delta = ArrayView1::from(&delta[..]);
            for (j, &xj) in x.iter().enumerate() {
                if xj != 0.0 {
                    let xs = xj * clf.input_scale[j];
                    clf.w.row_mut(j).scaled_add(-config.rate * xs, &delta);
                }
            }
            for (b, d) in clf.bias.iter_mut().zip(delta.iter()) {
                *b -= config.rate * d;
            }
        }
    }
    Ok(clf)
}

/// A `side × side` real image.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub side: usize,
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> (usize, usize) {
        let i = argmax(&self.values);
        (i % self.side, i / self.side)
    }

    /// Map to an 8-bit grayscale frame (min → 0, max → 255).
    pub fn to_frame(&self) -> RawFrame {
        let (lo, hi) = (self.min(), self.max());
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut f = RawFrame::filled(self.side, self.side, [0, 0, 0]);
        for (i, &v) in self.values.iter().enumerate() {
            let g = (((v - lo) / span) * 255.0).round() as u8;
            f.set_pixel(i % self.side, i / self.side, [g, g, g]);
        }
        f
    }
}

/// Linear map from a level's Complex activations to a heatmap, kept in
/// dual form: `W = Xᵀ α`, so the output for `x` is `b + αᵀ(X x)`. Every SGD
/// step from `W = 0` stays in the span of the training inputs, so this is
/// the same regressor without materializing `dim × side²` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRegressor {
    pub level: usize,
    pub side: usize,
    /// Training inputs, `n × dim`.
    pub basis: Array2<f64>,
    /// Dual coefficients, `n × side²`.
    pub alpha: Array2<f64>,
    pub bias: Array1<f64>,
}

impl HeatmapRegressor {
    pub fn zero(level: usize, side: usize, dim: usize) -> Self {
        HeatmapRegressor {
            level,
            side,
            basis: Array2::zeros((0, dim)),
            alpha: Array2::zeros((0, side * side)),
            bias: Array1::zeros(side * side),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn emit(&self, x: &[f64]) -> Result<Heatmap> {
        ensure_len("heatmap input", self.input_dim(), x.len())?;
        let k = self.basis.dot(&ArrayView1::from(x));
        let out = &self.bias + &self.alpha.t().dot(&k);
        Ok(Heatmap {
            side: self.side,
            values: out.to_vec(),
        })
    }

    pub fn to_chunk(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.u64(self.level as u64);
        w.u64(self.side as u64);
        w.matrix(&self.basis);
        w.matrix(&self.alpha);
        w.f64s(self.bias.as_slice().expect("contiguous"));
        w.finish()
    }

    pub fn from_chunk(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes, "heatmap chunk");
        let level = r.u64()? as usize;
        let side = r.u64()? as usize;
        let basis = r.matrix()?;
        let alpha = r.matrix()?;
        let bias = Array1::from(r.f64s()?);
        ensure_len("heatmap bias", side * side, bias.len())?;
        ensure_len("heatmap alpha rows", basis.nrows(), alpha.nrows())?;
        Ok(HeatmapRegressor {
            level,
            side,
            basis,
            alpha,
            bias,
        })
    }
}

/// Concatenated Complex activations (constant cell dropped) of all tiles
/// of a level.
pub fn level_features(model: &ModelState, level: usize) -> Vec<f64> {
    let k = model.spec.levels[level].simple.k;
    model
        .activations(level, Layer::Complex)
        .into_iter()
        .flat_map(|a| a[..k].iter().copied())
        .collect()
}

pub fn level_feature_dim(model: &ModelState, level: usize) -> usize {
    let l = &model.spec.levels[level];
    l.tile_count() * l.simple.k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    pub epochs: usize,
    /// Normalized-LMS step in (0, 2).
    pub rate: f64,
    pub seed: u64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig {
            epochs: 20,
            rate: 0.5,
            seed: 0,
        }
    }
}

/// Train one regressor by normalized-LMS SGD on squared error.
pub fn fit_heatmap_regressor(
    level: usize,
    side: usize,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    config: &RegressorConfig,
) -> Result<HeatmapRegressor> {
    ensure_len("heatmap targets", inputs.len(), targets.len())?;
    let n = inputs.len();
    if n == 0 {
        return Err(PvmError::InvalidArgument(
            "no heatmap training examples".into(),
        ));
    }
    let dim = inputs[0].len();
    let p = side * side;
    let basis = Array2::from_shape_fn((n, dim), |(i, j)| inputs[i][j]);
    let y = Array2::from_shape_fn((n, p), |(i, j)| targets[i][j]);
    let gram = basis.dot(&basis.t());
    let mut alpha = Array2::<f64>::zeros((n, p));
    let mut bias = Array1::<f64>::zeros(p);
    // Current predictions for every training example: F = K α + 1 bᵀ.
    let mut pred = Array2::<f64>::zeros((n, p));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &m in &order {
            let err = &pred.row(m) - &y.row(m);
            let step = config.rate / (gram[[m, m]] + 1.0);
            let delta = err.mapv(|e| -step * e);
            alpha.row_mut(m).scaled_add(1.0, &delta);
            bias.scaled_add(1.0, &delta);
            pred.axis_iter_mut(ndarray::Axis(0))
                .into_par_iter()
                .enumerate()
                .for_each(|(i, mut row)| row.scaled_add(gram[[i, m]] + 1.0, &delta));
        }
    }
    Ok(HeatmapRegressor {
        level,
        side,
        basis,
        alpha,
        bias,
    })
}

/// One heatmap per level from the model's current activations.
pub fn emit_heatmaps(regressors: &[HeatmapRegressor], model: &ModelState) -> Result<Vec<Heatmap>> {
    regressors
        .iter()
        .map(|r| r.emit(&level_features(model, r.level)))
        .collect()
}

/// A similarity transform of the field: scale about the center, then shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Augmentation {
    pub scale: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Augmentation {
    pub const IDENTITY: Augmentation = Augmentation {
        scale: 1.0,
        dx: 0.0,
        dy: 0.0,
    };

    /// Log-uniform scale in `[0.5, 2]`, shift within `±max_shift · field`.
    pub fn sample<R: Rng + ?Sized>(field: usize, max_shift: f64, rng: &mut R) -> Self {
        let span = max_shift * field as f64;
        Augmentation {
            scale: 2f64.powf(rng.random_range(-1.0..=1.0)),
            dx: rng.random_range(-span..=span),
            dy: rng.random_range(-span..=span),
        }
    }

    fn forward(&self, u: f64, field: usize) -> f64 {
        let c = field as f64 / 2.0;
        (u - c) * self.scale + c
    }

    /// Render the transformed view; uncovered area is black.
    pub fn apply(&self, image: &RawFrame) -> RawFrame {
        let field = image.width;
        let c = field as f64 / 2.0;
        let mut out = RawFrame::filled(image.width, image.height, [0, 0, 0]);
        for v in 0..image.height {
            for u in 0..image.width {
                let su = (u as f64 + 0.5 - self.dx - c) / self.scale + c - 0.5;
                let sv = (v as f64 + 0.5 - self.dy - c) / self.scale + c - 0.5;
                let px = image.sample_or(su, sv, [0.0; 3]);
                out.set_pixel(u, v, px.map(|x| x.round().clamp(0.0, 255.0) as u8));
            }
        }
        out
    }

    /// The box after the transform, in field coordinates.
    pub fn apply_box(&self, b: &BoundingBox, field: usize) -> BoundingBox {
        BoundingBox::new(
            self.forward(b.x, field) + self.dx,
            self.forward(b.y, field) + self.dy,
            b.w * self.scale,
            b.h * self.scale,
        )
    }
}

/// Binary `side × side` mask: 1 where the pixel center lies in the box.
pub fn box_mask(b: &BoundingBox, side: usize) -> Vec<f64> {
    let mut m = vec![0.0; side * side];
    if !b.present {
        return m;
    }
    for v in 0..side {
        for u in 0..side {
            if b.contains(u as f64 + 0.5, v as f64 + 0.5) {
                m[v * side + u] = 1.0;
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapTraining {
    pub augmentations: usize,
    pub max_shift: f64,
    pub settle: usize,
    pub regressor: RegressorConfig,
}

impl Default for HeatmapTraining {
    fn default() -> Self {
        HeatmapTraining {
            augmentations: 500,
            max_shift: 0.25,
            settle: 3,
            regressor: RegressorConfig::default(),
        }
    }
}

/// Train one regressor per level from augmented copies of the priming view.
/// `view` is the field-sized crop; `target` is the box in field coordinates.
/// The first augmentation is always the identity.
pub fn train_heatmap(
    model: &mut ModelState,
    view: &RawFrame,
    target: &BoundingBox,
    config: &HeatmapTraining,
) -> Result<Vec<HeatmapRegressor>> {
    if !target.present || target.w <= 0.0 || target.h <= 0.0 {
        return Err(PvmError::DegenerateBox {
            w: target.w,
            h: target.h,
        });
    }
    let field = model.spec.field_size;
    ensure_len("priming view width", field, view.width)?;
    ensure_len("priming view height", field, view.height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.regressor.seed);
    let levels = model.num_levels();
    let mut inputs: Vec<Vec<Vec<f64>>> = vec![Vec::new(); levels];
    let mut targets = Vec::new();
    for i in 0..config.augmentations.max(1) {
        let aug = if i == 0 {
            Augmentation::IDENTITY
        } else {
            Augmentation::sample(field, config.max_shift, &mut rng)
        };
        settle_on(model, &aug.apply(view), config.settle)?;
        for (l, inp) in inputs.iter_mut().enumerate() {
            inp.push(level_features(model, l));
        }
        targets.push(box_mask(&aug.apply_box(target, field), field));
    }
    model.reset_dynamics();
    inputs
        .iter()
        .enumerate()
        .map(|(l, inp)| fit_heatmap_regressor(l, field, inp, &targets, &config.regressor))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_pick_class_zero() {
        let clf = PerceptronClassifier {
            w: Array2::zeros((3, 4)),
            bias: vec![0.0; 4],
            input_scale: vec![1.0; 3],
        };
        let (scores, label) = clf.classify(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(scores, vec![0.0; 4]);
        assert_eq!(label, 0);
        assert!(clf.classify(&[1.0]).is_err());
        assert_eq!(argmax(&[0.9, -0.2]), 0);
    }

    #[test]
    fn single_class_training_is_rejected() {
        let mut d = LabeledActivationSet::new(2, 3);
        d.push(vec![1.0, 0.0], 1).unwrap();
        d.push(vec![0.0, 1.0], 1).unwrap();
        assert!(train_classifier(&d, &ClassifierConfig::default()).is_err());
        assert!(d.push(vec![0.0, 1.0], 3).is_err());
    }

    #[test]
    fn zero_epochs_keeps_initialization() {
        let mut d = LabeledActivationSet::new(2, 2);
        d.push(vec![1.0, 0.0], 0).unwrap();
        d.push(vec![0.0, 1.0], 1).unwrap();
        let cfg = ClassifierConfig {
            epochs: 0,
            ..Default::default()
        };
        let clf = train_classifier(&d, &cfg).unwrap();
        let init = PerceptronClassifier::random(2, 2, cfg.seed);
        assert_eq!((&clf.w, &clf.bias), (&init.w, &init.bias));
        assert!(clf
            .input_scale
            .iter()
            .all(|s| (s - 2f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn identity_target_matches_box() {
        let b = BoundingBox::new(2.0, 3.0, 4.0, 2.0);
        let m = box_mask(&Augmentation::IDENTITY.apply_box(&b, 10), 10);
        for v in 0..10 {
            for u in 0..10 {
                let inside = (2..6).contains(&u) && (3..5).contains(&v);
                assert_eq!(m[v * 10 + u], inside as u8 as f64);
            }
        }
    }

    #[test]
    fn augmentation_moves_box_and_pixels_together() {
        let mut img = RawFrame::filled(20, 20, [0, 0, 0]);
        for y in 8..12 {
            for x in 8..12 {
                img.set_pixel(x, y, [255, 255, 255]);
            }
        }
        let aug = Augmentation {
            scale: 1.0,
            dx: 3.0,
            dy: -2.0,
        };
        let out = aug.apply(&img);
        let b = aug.apply_box(&BoundingBox::new(8.0, 8.0, 4.0, 4.0), 20);
        assert_eq!((b.x, b.y), (11.0, 6.0));
        assert_eq!(out.pixel(12, 7), [255, 255, 255]);
        assert_eq!(out.pixel(9, 9), [0, 0, 0]);
    }

    #[test]
    fn zero_regressor_emits_bias() {
        let r = HeatmapRegressor::zero(0, 4, 3);
        let h = r.emit(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(h.values, vec![0.0; 16]);
    }

    #[test]
    fn regressor_fits_small_problem() {
        let inputs = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let targets = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let r = fit_heatmap_regressor(
            0,
            1,
            &inputs,
            &targets.iter().map(|t| vec![t[0]]).collect::<Vec<_>>(),
            &RegressorConfig {
                epochs: 200,
                ..Default::default()
            },
        )
        .unwrap();
        for (x, t) in inputs.iter().zip(&targets) {
            let h = r.emit(x).unwrap();
            assert!((h.values[0] - t[0]).abs() < 1e-3);
        }
    }

    #[test]
    fn regressor_chunk_round_trip() {
        let inputs = vec![vec![1.0, 0.5], vec![0.2, 1.0]];
        let targets = vec![vec![1.0; 4], vec![0.0; 4]];
        let r =
            fit_heatmap_regressor(1, 2, &inputs, &targets, &RegressorConfig::default()).unwrap();
        assert_eq!(HeatmapRegressor::from_chunk(&r.to_chunk()).unwrap(), r);
    }
}
