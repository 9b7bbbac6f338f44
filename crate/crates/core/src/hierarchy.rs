//! The tile pyramid: wiring, per-step dataflow, weight sharing and training.
//!
//! Within a step levels run bottom-up; a level's Simple input is the
//! concatenated step-`t` Complex outputs of its 2×2 children. Recurrent,
//! lateral and top-down context always come from step `t−1` (the previous
//! output bank), and Complex learning for step `t−1`'s prediction fires once
//! step `t`'s Simple response is known.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, PvmError, Result};
use crate::ingest::{tile_and_center, FrameWindow, RawFrame, StreamConfig};
use crate::predictive::{
    apply_complex_update, assemble_context, complex_activate, complex_gradient, normalize_complex,
    ComplexParams, ComplexState, ComplexWeights, ContextVector, Direction,
};
use crate::sparse_coding::{
    asc_encode, normalize_simple, reconstruction_error, Dictionary, SimpleParams, SparseCode,
    UpdateSchedule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContextMode {
    /// Recurrent, lateral and top-down context.
    Full,
    /// Lateral and top-down blocks forced to zero (recurrent kept).
    NoLateralFeedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub level_index: usize,
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub input_dim: usize,
    pub simple: SimpleParams,
}

impl LevelSpec {
    pub fn cells(&self) -> usize {
        self.simple.k + 1
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_x * self.tiles_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchySpec {
    pub field_size: usize,
    pub tile_size: usize,
    pub frames_per_input: usize,
    pub levels: Vec<LevelSpec>,
    pub schedule: UpdateSchedule,
    pub complex: ComplexParams,
    pub context: ContextMode,
}

impl Default for HierarchySpec {
    fn default() -> Self {
        HierarchySpec::pyramid(80, 10, 1, 4, SimpleParams::default())
            .expect("default pyramid is consistent")
    }
}

impl HierarchySpec {
    /// A pyramid whose level-1 grid is `field/tile` per side, halving per
    /// level, with the same Simple parameters everywhere.
    pub fn pyramid(
        field_size: usize,
        tile_size: usize,
        frames_per_input: usize,
        num_levels: usize,
        simple: SimpleParams,
    ) -> Result<Self> {
        Self::pyramid_with(
            field_size,
            tile_size,
            frames_per_input,
            &vec![simple; num_levels],
        )
    }

    pub fn pyramid_with(
        field_size: usize,
        tile_size: usize,
        frames_per_input: usize,
        per_level: &[SimpleParams],
    ) -> Result<Self> {
        if per_level.is_empty() {
            return Err(PvmError::Config(
                "hierarchy needs at least one level".into(),
            ));
        }
        let stream = StreamConfig {
            field_size,
            tile_size,
            frames_per_input,
            ..Default::default()
        };
        stream.validate()?;
        let mut levels = Vec::with_capacity(per_level.len());
        let mut side = stream.tiles_per_side();
        let mut input_dim = stream.input_dim();
        for (i, p) in per_level.iter().enumerate() {
            if i > 0 {
                if !side.is_multiple_of(2) {
                    return Err(PvmError::Config(format!(
                        "level {} grid {side}x{side} cannot be halved",
                        i
                    )));
                }
                side /= 2;
                input_dim = 4 * (per_level[i - 1].k + 1);
            }
            levels.push(LevelSpec {
                level_index: i,
                tiles_x: side,
                tiles_y: side,
                input_dim,
                simple: *p,
            });
        }
        let spec = HierarchySpec {
            field_size,
            tile_size,
            frames_per_input,
            levels,
            schedule: UpdateSchedule::default(),
            complex: ComplexParams::default(),
            context: ContextMode::Full,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn stream_config(&self) -> StreamConfig {
        StreamConfig {
            field_size: self.field_size,
            tile_size: self.tile_size,
            frames_per_input: self.frames_per_input,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.stream_config().validate()?;
        let first = self
            .levels
            .first()
            .ok_or_else(|| PvmError::Config("hierarchy needs at least one level".into()))?;
        let side = self.field_size / self.tile_size;
        if first.tiles_x != side || first.tiles_y != side {
            return Err(PvmError::Config(format!(
                "level 1 grid {}x{} does not tile a {} field with {}-pixel tiles",
                first.tiles_x, first.tiles_y, self.field_size, self.tile_size
            )));
        }
        if first.input_dim != self.stream_config().input_dim() {
            return Err(PvmError::Config("level 1 input dimension mismatch".into()));
        }
        for w in self.levels.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            if lo.tiles_x != 2 * hi.tiles_x || lo.tiles_y != 2 * hi.tiles_y {
                return Err(PvmError::Config(format!(
                    "level {} grid must be half of level {}",
                    hi.level_index + 1,
                    lo.level_index + 1
                )));
            }
            if hi.input_dim != 4 * lo.cells() {
                return Err(PvmError::Config(format!(
                    "level {} input must be 4 child responses",
                    hi.level_index + 1
                )));
            }
        }
        let top = self.levels.last().expect("non-empty");
        if top.tiles_x != 1 || top.tiles_y != 1 {
            return Err(PvmError::Config(format!(
                "top level grid must be 1x1, got {}x{}",
                top.tiles_x, top.tiles_y
            )));
        }
        for l in &self.levels {
            l.simple.validate()?;
        }
        Ok(())
    }

    pub fn total_tiles(&self) -> usize {
        self.levels.iter().map(|l| l.tile_count()).sum()
    }

    /// Simple plus Complex cells, not counting the constant cell.
    pub fn total_cells(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.tile_count() * 2 * l.simple.k)
            .sum()
    }

    fn feedback_dim(&self, level: usize) -> usize {
        match self.levels.get(level + 1) {
            Some(parent) => parent.cells(),
            None => self.levels[level].cells(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileState {
    pub complex: ComplexState,
    /// Raw sparse code of the current step.
    pub code: Vec<f64>,
    /// Normalized Simple response (length J) of the current step.
    pub simple: Vec<f64>,
    /// Output bank read as context: the previous step's Complex response.
    pub prev_out: Vec<f64>,
    /// Output bank written during the current step.
    pub out: Vec<f64>,
    /// `(p0, c_pred)` awaiting next step's Simple response for learning.
    pub pending: Option<(ContextVector, Vec<f64>)>,
}

impl TileState {
    fn new(k: usize) -> Self {
        let j = k + 1;
        TileState {
            complex: ComplexState::new(j),
            code: vec![0.0; k],
            simple: vec![0.0; j],
            prev_out: vec![0.0; j],
            out: vec![0.0; j],
            pending: None,
        }
    }

    fn reset_dynamics(&mut self) {
        self.code.fill(0.0);
        self.simple.fill(0.0);
        self.prev_out.fill(0.0);
        self.out.fill(0.0);
        self.pending = None;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    pub dictionary: Dictionary,
    pub weights: ComplexWeights,
    pub tiles: Vec<TileState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub spec: HierarchySpec,
    pub levels: Vec<LevelState>,
    /// Steps presented so far (learning or not).
    pub step: u64,
    /// Steps since the last [`ModelState::reset_dynamics`].
    pub since_reset: u64,
}

/// Which layer of a level to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    Simple,
    Complex,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Mean over tiles of `‖x − Da‖² / m`, per level.
    pub recon_mse: Vec<f64>,
    /// Mean over tiles of `‖a_t − c_{t−1}‖² / J`, per level (`None` on the
    /// first step after a reset).
    pub pred_mse: Vec<Option<f64>>,
    pub encodes: usize,
    pub activations: usize,
    pub dictionary_updates: Vec<bool>,
}

/// Build a model: random dictionaries from `seed`, zero Complex weights,
/// zeroed context banks.
pub fn build(spec: &HierarchySpec, seed: u64) -> Result<ModelState> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = spec
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| LevelState {
            dictionary: Dictionary::random(l.input_dim, l.simple.k, spec.schedule, &mut rng),
            weights: ComplexWeights::zeros(l.cells(), spec.feedback_dim(i)),
            tiles: (0..l.tile_count())
                .map(|_| TileState::new(l.simple.k))
                .collect(),
        })
        .collect();
    Ok(ModelState {
        spec: spec.clone(),
        levels,
        step: 0,
        since_reset: 0,
    })
}

impl ModelState {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Clear all per-tile dynamics (codes, banks, pending learning pairs).
    /// Weights, dictionaries and running variances are kept.
    pub fn reset_dynamics(&mut self) {
        for l in &mut self.levels {
            for t in &mut l.tiles {
                t.reset_dynamics();
            }
        }
        self.since_reset = 0;
    }

    /// Current normalized responses of one layer, per tile. Simple responses
    /// exclude the constant cell; Complex responses include it.
    pub fn activations(&self, level: usize, layer: Layer) -> Vec<&[f64]> {
        let l = &self.levels[level];
        l.tiles
            .iter()
            .map(|t| match layer {
                Layer::Simple => &t.simple[..l.dictionary.size()],
                Layer::Complex => &t.prev_out[..],
            })
            .collect()
    }

    /// The current Complex output of a tile (valid after `step`).
    pub fn complex_output(&self, level: usize, tile: usize) -> &[f64] {
        &self.levels[level].tiles[tile].prev_out
    }

    /// Present one frame window (oldest first).
    pub fn present(&mut self, window: &[RawFrame], learn: bool) -> Result<StepReport> {
        let inputs = tile_and_center(window, &self.spec.stream_config())?;
        self.step(&inputs, learn)
    }

    /// Advance the whole hierarchy by one time step.
    pub fn step(&mut self, level0_inputs: &[Vec<f64>], learn: bool) -> Result<StepReport> {
        let spec = self.spec.clone();
        ensure_len(
            "level-1 tile count",
            spec.levels[0].tile_count(),
            level0_inputs.len(),
        )?;
        let mut report = StepReport {
            recon_mse: Vec::with_capacity(spec.levels.len()),
            pred_mse: Vec::with_capacity(spec.levels.len()),
            encodes: 0,
            activations: 0,
            dictionary_updates: Vec::with_capacity(spec.levels.len()),
        };
        let mut child_inputs: Option<Vec<Vec<f64>>> = None;
        for li in 0..spec.levels.len() {
            let lspec = &spec.levels[li];
            let inputs: Vec<Vec<f64>> = match child_inputs.take() {
                None => level0_inputs.to_vec(),
                Some(v) => v,
            };
            for x in &inputs {
                ensure_len("tile input", lspec.input_dim, x.len())?;
            }
            let (feedback_bank, feedback_dim, parent_side) = match self.levels.get(li + 1) {
                Some(parent) => (
                    Some(
                        parent
                            .tiles
                            .iter()
                            .map(|t| t.prev_out.clone())
                            .collect::<Vec<_>>(),
                    ),
                    spec.levels[li + 1].cells(),
                    spec.levels[li + 1].tiles_x,
                ),
                None => (None, lspec.cells(), 1),
            };
            let level = &mut self.levels[li];

            // Encode all tiles against the shared dictionary.
            let dict = &level.dictionary;
            let codes: Vec<SparseCode> = inputs
                .par_iter()
                .enumerate()
                .map(|(ti, x)| {
                    asc_encode(x, dict, &lspec.simple).map_err(|e| PvmError::Tile {
                        level: li + 1,
                        tx: ti % lspec.tiles_x,
                        ty: ti / lspec.tiles_x,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<_>>()?;
            report.encodes += codes.len();
            let simple: Vec<Vec<f64>> =
                codes.iter().map(|c| normalize_simple(&c.a, dict)).collect();
            let recon: f64 = inputs
                .iter()
                .zip(&codes)
                .map(|(x, c)| reconstruction_error(x, &c.a, dict).map(|e| e / x.len() as f64))
                .sum::<Result<f64>>()?
                / inputs.len() as f64;
            report.recon_mse.push(recon);

            let pred = (self.since_reset > 0).then(|| {
                let j = lspec.cells() as f64;
                level
                    .tiles
                    .iter()
                    .zip(&simple)
                    .map(|(t, a)| {
                        t.prev_out
                            .iter()
                            .zip(a)
                            .map(|(c, a)| (a - c).powi(2))
                            .sum::<f64>()
                            / j
                    })
                    .sum::<f64>()
                    / level.tiles.len() as f64
            });
            report.pred_mse.push(pred);

            // Simple-layer learning: λ scale, batch statistics, scheduled update.
            let mut updated = false;
            if learn {
                for (x, c) in inputs.iter().zip(&codes) {
                    level.dictionary.adapt_lambda_scale(c);
                    level.dictionary.accumulate(x, &c.a)?;
                }
                updated = level.dictionary.end_step();
            }
            report.dictionary_updates.push(updated);

            // Complex learning for last step's predictions.
            if learn {
                let params = &spec.complex;
                let grads = level
                    .tiles
                    .par_iter()
                    .zip(simple.par_iter())
                    .filter_map(|(t, a_next)| {
                        t.pending
                            .as_ref()
                            .map(|(p0, c_pred)| complex_gradient(p0, c_pred, a_next, params))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if !grads.is_empty() {
                    apply_complex_update(&mut level.weights, &grads, params)?;
                }
            }

            // Complex activation with context from the previous bank.
            let prev_bank: Vec<Vec<f64>> = level.tiles.iter().map(|t| t.prev_out.clone()).collect();
            let weights = &level.weights;
            let t_now = weights.t;
            let (tx_n, ty_n) = (lspec.tiles_x, lspec.tiles_y);
            let context = spec.context;
            let params = spec.complex;
            level
                .tiles
                .par_iter_mut()
                .zip(simple.into_par_iter())
                .zip(codes.into_par_iter())
                .enumerate()
                .try_for_each(|(ti, ((tile, a), code))| -> Result<()> {
                    let (tx, ty) = (ti % tx_n, ti / tx_n);
                    let mut laterals: [Option<&[f64]>; 4] = [None; 4];
                    let mut feedback: Option<&[f64]> = None;
                    if context == ContextMode::Full {
                        for dir in Direction::ALL {
                            let (dx, dy) = dir.offset();
                            let nx = tx as isize + dx;
                            let ny = ty as isize + dy;
                            if nx >= 0 && ny >= 0 && (nx as usize) < tx_n && (ny as usize) < ty_n {
                                laterals[dir as usize] =
                                    Some(&prev_bank[ny as usize * tx_n + nx as usize][..]);
                            }
                        }
                        if let Some(bank) = &feedback_bank {
                            feedback = Some(&bank[(ty / 2) * parent_side + tx / 2][..]);
                        }
                    }
                    let p0 =
                        assemble_context(&a, &prev_bank[ti], laterals, feedback, feedback_dim)?;
                    let c0 = complex_activate(&p0, weights)?;
                    let c = normalize_complex(&c0, &mut tile.complex, t_now, learn, &params);
                    tile.code = code.a;
                    tile.simple = a;
                    tile.pending = if learn { Some((p0, c.clone())) } else { None };
                    tile.out = c;
                    Ok(())
                })?;
            report.activations += level.tiles.len();

            // Next level's inputs: 2×2 children, row-major.
            if li + 1 < spec.levels.len() {
                let up = &spec.levels[li + 1];
                let mut next = Vec::with_capacity(up.tile_count());
                for py in 0..up.tiles_y {
                    for px in 0..up.tiles_x {
                        let mut v = Vec::with_capacity(up.input_dim);
                        for (cx, cy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                            let child = (2 * py + cy) * tx_n + 2 * px + cx;
                            v.extend_from_slice(&level.tiles[child].out);
                        }
                        next.push(v);
                    }
                }
                child_inputs = Some(next);
            }
        }
        for level in &mut self.levels {
            for t in &mut level.tiles {
                std::mem::swap(&mut t.prev_out, &mut t.out);
            }
        }
        self.step += 1;
        self.since_reset += 1;
        Ok(report)
    }
}

/// One row of the training metrics log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub step: u64,
    pub level: usize,
    pub recon_mse: f64,
    pub pred_mse: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
    /// Learning steps performed.
    pub steps: u64,
    /// Cumulative step numbers of dictionary updates, per level.
    pub update_steps: Vec<Vec<u64>>,
}

impl MetricsLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,level,recon_mse,pred_mse\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.step, r.level, r.recon_mse, r.pred_mse
            ));
        }
        s
    }

    /// Prediction errors of one level, in logging order.
    pub fn pred_series(&self, level: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.level == level)
            .map(|r| r.pred_mse)
            .collect()
    }
}

/// Accumulates per-step reports into windowed means.
#[derive(Debug, Clone)]
pub struct MetricsAccumulator {
    every: u64,
    recon: Vec<f64>,
    pred: Vec<f64>,
    pred_n: Vec<u64>,
    n: u64,
}

impl MetricsAccumulator {
    pub fn new(levels: usize, every: u64) -> Self {
        MetricsAccumulator {
            every: every.max(1),
            recon: vec![0.0; levels],
            pred: vec![0.0; levels],
            pred_n: vec![0; levels],
            n: 0,
        }
    }

    pub fn push(&mut self, step: u64, report: &StepReport, log: &mut MetricsLog) {
        for (i, r) in report.recon_mse.iter().enumerate() {
            self.recon[i] += r;
            if let Some(p) = report.pred_mse[i] {
                self.pred[i] += p;
                self.pred_n[i] += 1;
            }
        }
        self.n += 1;
        if self.n == self.every {
            self.flush(step, log);
        }
    }

    pub fn flush(&mut self, step: u64, log: &mut MetricsLog) {
        if self.n == 0 {
            return;
        }
        for i in 0..self.recon.len() {
            log.rows.push(MetricsRow {
                step,
                level: i + 1,
                recon_mse: self.recon[i] / self.n as f64,
                pred_mse: if self.pred_n[i] > 0 {
                    self.pred[i] / self.pred_n[i] as f64
                } else {
                    f64::NAN
                },
            });
        }
        self.recon.fill(0.0);
        self.pred.fill(0.0);
        self.pred_n.fill(0);
        self.n = 0;
    }
}

/// Run learning steps over `passes` replays of a frame stream. `make_stream`
/// is called once per pass. On error the model keeps all progress made so far.
pub fn train_on_stream<I, F>(
    model: &mut ModelState,
    mut make_stream: F,
    passes: usize,
    log_every: u64,
) -> Result<MetricsLog>
where
    F: FnMut() -> I,
    I: Iterator<Item = Result<RawFrame>>,
{
    let mut log = MetricsLog {
        update_steps: vec![Vec::new(); model.num_levels()],
        ..Default::default()
    };
    let mut acc = MetricsAccumulator::new(model.num_levels(), log_every);
    let mut window = FrameWindow::new(model.spec.frames_per_input);
    for _ in 0..passes {
        window.clear();
        let mut saw_frame = false;
        for frame in make_stream() {
            let frame = frame?;
            saw_frame = true;
            if let Some(w) = window.push(frame) {
                let report = model.present(&w, true)?;
                log.steps += 1;
                for (i, &u) in report.dictionary_updates.iter().enumerate() {
                    if u {
                        log.update_steps[i].push(log.steps);
                    }
                }
                acc.push(log.steps, &report, &mut log);
            }
        }
        if !saw_frame {
            return Err(PvmError::EmptyStream);
        }
    }
    acc.flush(log.steps, &mut log);
    Ok(log)
}
