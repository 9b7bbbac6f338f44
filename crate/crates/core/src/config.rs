//! Run configuration: one TOML file of `key = value` lines grouped in
//! sections, with dotted-key overrides from the command line.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PvmError, Result};
use crate::hierarchy::{ContextMode, HierarchySpec};
use crate::predictive::ComplexParams;
use crate::readout::{ClassifierConfig, HeatmapTraining, RegressorConfig};
use crate::sparse_coding::{SimpleParams, UpdateSchedule};
use crate::tracker::TrackerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub field_size: usize,
    pub tile_size: usize,
    pub frames_per_input: usize,
    pub levels: usize,
    pub k: usize,
    pub n: usize,
    pub t_max: usize,
    /// Per-level overrides of `k` and `n`; empty means uniform.
    pub k_per_level: Vec<usize>,
    pub n_per_level: Vec<usize>,
    pub context: ContextMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let s = SimpleParams::default();
        ModelConfig {
            field_size: 80,
            tile_size: 10,
            frames_per_input: 1,
            levels: 4,
            k: s.k,
            n: s.n,
            t_max: s.t_max,
            k_per_level: Vec::new(),
            n_per_level: Vec::new(),
            context: ContextMode::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub passes: usize,
    pub log_every: u64,
    pub seed: u64,
    pub repeat_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            passes: 1,
            log_every: 100,
            seed: 0,
            repeat_count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub classes: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub settle: usize,
    pub epochs: usize,
    pub rate: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        ClassifyConfig {
            classes: 41,
            train_per_class: 20,
            test_per_class: 10,
            settle: 3,
            epochs: c.epochs,
            rate: c.rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackConfig {
    pub window_multiple: f64,
    pub absence_threshold: f64,
    pub level_weights: Vec<f64>,
    pub steps_per_frame: usize,
    pub augmentations: usize,
    pub max_shift: f64,
    pub settle: usize,
    pub epochs: usize,
    pub rate: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        let t = TrackerConfig::default();
        TrackConfig {
            window_multiple: t.window_multiple,
            absence_threshold: t.absence_threshold,
            level_weights: t.level_weights,
            steps_per_frame: t.steps_per_frame,
            augmentations: t.training.augmentations,
            max_shift: t.training.max_shift,
            settle: t.training.settle,
            epochs: t.training.regressor.epochs,
            rate: t.training.regressor.rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub stc_frames: usize,
    pub selectivity_stride: usize,
    pub basis_dim: usize,
    pub pca_frames: usize,
    pub nm_iterations: usize,
    pub probe_frames: usize,
    pub top_n: usize,
    pub settle: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            stc_frames: 500_000,
            selectivity_stride: 100,
            basis_dim: 1000,
            pca_frames: 10_000,
            nm_iterations: 2000,
            probe_frames: 1000,
            top_n: 16,
            settle: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub schedule: UpdateSchedule,
    pub complex: ComplexParams,
    pub train: TrainConfig,
    pub classify: ClassifyConfig,
    pub track: TrackConfig,
    pub analysis: AnalysisConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PvmError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PvmError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Apply `section.key=value` overrides; values are parsed as TOML
    /// (bare words fall back to strings).
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(&self.to_toml()).map_err(|e| PvmError::Config(e.to_string()))?;
        for o in overrides {
            let o = o.as_ref();
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| PvmError::Config(format!("override `{o}` is not key=value")))?;
            let value = parse_value(raw.trim());
            let path: Vec<&str> = key.trim().split('.').collect();
            let (last, parents) = path.split_last().expect("split yields one item");
            let mut cur = &mut table;
            for p in parents {
                cur = cur
                    .entry(p.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| PvmError::Config(format!("`{p}` is not a section")))?;
            }
            cur.insert(last.to_string(), value);
        }
        let text = toml::to_string(&table).map_err(|e| PvmError::Config(e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn simple_params(&self) -> Vec<SimpleParams> {
        let m = &self.model;
        (0..m.levels)
            .map(|i| SimpleParams {
                k: m.k_per_level.get(i).copied().unwrap_or(m.k),
                n: m.n_per_level.get(i).copied().unwrap_or(m.n),
                t_max: m.t_max,
            })
            .collect()
    }

    pub fn hierarchy_spec(&self) -> Result<HierarchySpec> {
        let m = &self.model;
        for p in self.simple_params() {
            p.validate()?;
        }
        let mut spec = HierarchySpec::pyramid_with(
            m.field_size,
            m.tile_size,
            m.frames_per_input,
            &self.simple_params(),
        )?;
        spec.schedule = self.schedule;
        spec.complex = self.complex;
        spec.context = m.context;
        spec.validate()?;
        Ok(spec)
    }

    pub fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig {
            epochs: self.classify.epochs,
            rate: self.classify.rate,
            seed: self.train.seed,
        }
    }

    pub fn tracker(&self) -> TrackerConfig {
        let t = &self.track;
        TrackerConfig {
            window_multiple: t.window_multiple,
            absence_threshold: t.absence_threshold,
            level_weights: t.level_weights.clone(),
            steps_per_frame: t.steps_per_frame,
            training: HeatmapTraining {
                augmentations: t.augmentations,
                max_shift: t.max_shift,
                settle: t.settle,
                regressor: RegressorConfig {
                    epochs: t.epochs,
                    rate: t.rate,
                    seed: self.train.seed,
                },
            },
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_model_constants() {
        let c = RunConfig::default();
        assert_eq!((c.model.k, c.model.n, c.model.t_max), (400, 70, 25));
        assert_eq!(c.model.field_size, 80);
        assert_eq!(c.complex.self_penalty, 0.9);
        assert_eq!(c.complex.weak_decay, 1e-5);
        assert_eq!(c.complex.rate_offset, 10000.0);
        assert_eq!(c.complex.rate_divisor, 10.0);
        assert_eq!((c.schedule.initial, c.schedule.growth), (1000, 1.1));
        let spec = c.hierarchy_spec().unwrap();
        let grids: Vec<usize> = spec.levels.iter().map(|l| l.tiles_x).collect();
        assert_eq!(grids, vec![8, 4, 2, 1]);
    }

    #[test]
    fn round_trip_and_overrides() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml_str(&c.to_toml()).unwrap(), c);
        let o = c
            .with_overrides(&[
                "model.k=64",
                "model.context=NoLateralFeedback",
                "train.seed = 7",
            ])
            .unwrap();
        assert_eq!(o.model.k, 64);
        assert_eq!(o.model.context, ContextMode::NoLateralFeedback);
        assert_eq!(o.train.seed, 7);
        assert!(c.with_overrides(&["model.bogus=1"]).is_err());
        assert!(c.with_overrides(&["model.k"]).is_err());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::from_toml_str("[model]\nfield_size = 20\nlevels = 2\n").unwrap();
        assert_eq!(c.model.field_size, 20);
        assert_eq!(c.model.k, 400);
        assert_eq!(c.hierarchy_spec().unwrap().levels.len(), 2);
    }
}
