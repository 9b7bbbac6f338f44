use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use log::info;
use ndarray::ArrayView1;
use pvm_core::analysis::nelder_mead::NelderMeadOptions;
use pvm_core::analysis::optimize::optimize_stimulus;
use pvm_core::analysis::pca::{frame_vector, pca_basis};
use pvm_core::analysis::render::{
    render_complex_contributors, render_dictionary_grid, render_patch, render_v2_composite,
    tile_patches,
};
use pvm_core::analysis::selectivity::selectivity_search;
use pvm_core::analysis::stability::stability_report;
use pvm_core::analysis::stc::stc_analysis;
use pvm_core::analysis::tuning::{phase_modulation, TuningOptions};
use pvm_core::analysis::{CellRef, Ranking};
use pvm_core::checkpoint::load_checkpoint;
use pvm_core::config::RunConfig;
use pvm_core::ingest::write_png;
use pvm_core::{Layer, ModelState, RawFrame};
use serde::Serialize;

use crate::frames::{FrameSource, Synthetic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    /// All first-level dictionary atoms as image patches.
    DictGrid,
    /// Receptive fields of the Simple cells feeding a Complex cell.
    Contributors,
    /// Composite view of a second-level atom.
    V2,
    /// Spike-triggered covariance of a first-level cell.
    Stc,
    /// Frames that drive a cell most selectively.
    Selectivity,
    /// Stimulus that maximizes a cell's selectivity.
    Optimize,
    /// Eigenvalues of the linearized Complex dynamics.
    Stability,
    /// Phase modulation of Simple and Complex cells under drifting gratings.
    Modulation,
}

impl Analysis {
    fn name(self) -> &'static str {
        match self {
            Analysis::DictGrid => "dict-grid",
            Analysis::Contributors => "contributors",
            Analysis::V2 => "v2",
            Analysis::Stc => "stc",
            Analysis::Selectivity => "selectivity",
            Analysis::Optimize => "optimize",
            Analysis::Stability => "stability",
            Analysis::Modulation => "modulation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayerArg {
    Simple,
    Complex,
}

impl From<LayerArg> for Layer {
    fn from(l: LayerArg) -> Layer {
        match l {
            LayerArg::Simple => Layer::Simple,
            LayerArg::Complex => Layer::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RankingArg {
    Signed,
    Absolute,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    analysis: Analysis,

    #[arg(long)]
    checkpoint: PathBuf,

    /// Output directory.
    #[arg(long)]
    out: PathBuf,

    /// Level, counted from 1.
    #[arg(long, default_value_t = 1)]
    level: usize,

    #[arg(long, default_value_t = 0)]
    tile: usize,

    #[arg(long, default_value_t = 0)]
    cell: usize,

    #[arg(long, value_enum, default_value_t = LayerArg::Complex)]
    layer: LayerArg,

    #[arg(long, value_enum, default_value_t = RankingArg::Signed)]
    ranking: RankingArg,

    /// Frame count: noise frames for stc, stream frames for selectivity,
    /// optimize and stability. Defaults come from the `analysis` section.
    #[arg(long)]
    frames: Option<usize>,

    /// Frame directory or blob; a seeded grating video is used otherwise.
    #[arg(long)]
    data: Option<PathBuf>,
}

struct Ctx<'a> {
    config: &'a RunConfig,
    args: &'a AnalyzeArgs,
    model: ModelState,
    level: usize,
}

impl Ctx<'_> {
    fn artifact(&self, ext: &str, with_cell: bool) -> PathBuf {
        let name = self.args.analysis.name();
        let file = if with_cell {
            format!("{name}_{}_{}.{ext}", self.level + 1, self.args.cell)
        } else {
            format!("{name}_{}.{ext}", self.level + 1)
        };
        self.args.out.join(file)
    }

    fn cell(&self) -> CellRef {
        CellRef {
            level: self.level,
            layer: self.args.layer.into(),
            tile: self.args.tile,
            cell: self.args.cell,
        }
    }

    fn ranking(&self) -> Ranking {
        match self.args.ranking {
            RankingArg::Signed => Ranking::Signed,
            RankingArg::Absolute => Ranking::Absolute,
        }
    }

    fn frames(&self, default: usize) -> Result<FrameSource> {
        let n = self.args.frames.unwrap_or(default);
        let stream = self.model.spec.stream_config();
        Ok(
            match FrameSource::open(self.args.data.as_deref(), &stream)? {
                Some(s) => s,
                None => FrameSource::synthetic(
                    Synthetic::Gratings,
                    self.model.spec.field_size,
                    n,
                    self.config.train.seed,
                ),
            },
        )
    }

    fn first_level_only(&self) -> Result<()> {
        if self.level != 0 {
            return Err(crate::usage(format!(
                "{} works on first-level (pixel-space) cells only",
                self.args.analysis.name()
            )));
        }
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_image(path: &Path, frame: &RawFrame) -> Result<()> {
    write_png(path, frame)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn run(config: &RunConfig, args: &AnalyzeArgs) -> Result<()> {
    let model = load_checkpoint(&args.checkpoint)?;
    if args.level == 0 || args.level > model.num_levels() {
        return Err(crate::usage(format!(
            "--level must be in 1..={}",
            model.num_levels()
        )));
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut ctx = Ctx {
        config,
        args,
        model,
        level: args.level - 1,
    };
    let a = &config.analysis;
    let tile = ctx.model.spec.tile_size;
    match args.analysis {
        Analysis::DictGrid => {
            ctx.first_level_only()?;
            let img = render_dictionary_grid(&ctx.model.levels[0].dictionary, tile, 1)?;
            write_image(&ctx.artifact("png", false), &img)
        }
        Analysis::Contributors => {
            ctx.first_level_only()?;
            let l = &ctx.model.levels[0];
            let img = render_complex_contributors(
                &l.dictionary,
                &l.weights,
                args.cell,
                a.top_n,
                ctx.ranking(),
                tile,
                1,
            )?;
            write_image(&ctx.artifact("png", true), &img)
        }
        Analysis::V2 => {
            if ctx.model.num_levels() < 2 {
                return Err(crate::usage("v2 needs a model with at least two levels"));
            }
            ctx.level = 1;
            let v2 = render_v2_composite(&ctx.model, args.cell, ctx.ranking())?;
            write_image(&ctx.artifact("png", true), &v2.image)?;
            write_json(&ctx.artifact("json", true), &v2.boxes)
        }
        Analysis::Stc => {
            ctx.first_level_only()?;
            let frames = args.frames.unwrap_or(a.stc_frames);
            info!("STC over {frames} noise frames");
            let r = stc_analysis(
                &ctx.model,
                args.tile,
                args.layer.into(),
                args.cell,
                frames,
                config.train.seed,
            )?;
            let mut csv = String::from("rank,eigenvalue\n");
            for (i, v) in r.eigenvalues.iter().enumerate() {
                csv.push_str(&format!("{i},{v}\n"));
            }
            let path = ctx.artifact("csv", true);
            std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
            let patches = r
                .excitatory
                .iter()
                .chain(&r.suppressive)
                .map(|v| render_patch(ArrayView1::from(v.as_slice()), tile))
                .collect::<pvm_core::Result<Vec<_>>>()?;
            write_image(
                &ctx.artifact("png", true),
                &tile_patches(&patches, patches.len(), 1),
            )
        }
        Analysis::Selectivity => {
            let source = ctx.frames(a.pca_frames)?;
            let n = args.frames.unwrap_or(a.pca_frames);
            let cell = ctx.cell();
            let r = selectivity_search(
                &mut ctx.model,
                source.iter().take(n),
                cell,
                a.selectivity_stride,
                a.top_n,
            )?;
            println!(
                "{} frames evaluated, {} silent; best s = {:.4}",
                r.evaluated,
                r.skipped,
                r.top.first().map_or(0.0, |h| h.s)
            );
            if !r.top.is_empty() {
                let imgs: Vec<RawFrame> = r.top.iter().map(|h| h.frame.clone()).collect();
                let cols = (imgs.len() as f64).sqrt().ceil() as usize;
                write_image(&ctx.artifact("png", true), &tile_patches(&imgs, cols, 2))?;
            }
            write_json(&ctx.artifact("json", true), &r)
        }
        Analysis::Optimize => {
            let source = ctx.frames(a.pca_frames)?;
            let frames = source.take(args.frames.unwrap_or(a.pca_frames))?;
            let cell = ctx.cell();
            let search = selectivity_search(
                &mut ctx.model,
                frames.iter().cloned().map(Ok),
                cell,
                a.selectivity_stride,
                1,
            )?;
            let init = search
                .top
                .first()
                .map(|h| h.frame.clone())
                .or_else(|| frames.first().cloned())
                .ok_or_else(|| crate::usage("no frames to optimize from"))?;
            let samples: Vec<Vec<f64>> = frames.iter().map(frame_vector).collect();
            let basis = pca_basis(&samples, a.basis_dim, config.train.seed)?;
            info!("optimizing over a {}-component basis", basis.dim());
            let opts = NelderMeadOptions {
                max_iter: a.nm_iterations,
                initial_step: 0.1 * basis.variances.first().copied().unwrap_or(1.0).sqrt(),
                ..Default::default()
            };
            let r = optimize_stimulus(&mut ctx.model, cell, &basis, &init, a.settle, &opts)?;
            println!(
                "selectivity {:.4} -> {:.4} in {} iterations",
                r.s_init, r.s, r.iterations
            );
            write_image(&ctx.artifact("png", true), &r.image)?;
            write_json(&ctx.artifact("json", true), &r)
        }
        Analysis::Stability => {
            let source = ctx.frames(a.probe_frames)?;
            let probe = source.take(args.frames.unwrap_or(a.probe_frames))?;
            let r = stability_report(&mut ctx.model, &probe)?;
            for l in &r.levels {
                println!(
                    "level {}: {} variables, max real part {:.4}, spectral radius {:.4}",
                    l.level + 1,
                    l.dim,
                    l.max_real,
                    l.spectral_radius
                );
            }
            write_json(&args.out.join("stability.json"), &r)
        }
        Analysis::Modulation => {
            let r = phase_modulation(&mut ctx.model, ctx.level, &TuningOptions::default())?;
            println!(
                "median modulation: Simple {:?}, Complex {:?}",
                r.median_simple, r.median_complex
            );
            write_json(&ctx.artifact("json", false), &r)
        }
    }
}
