use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use log::{info, warn};
use pvm_core::checkpoint::save_checkpoint;
use pvm_core::config::RunConfig;
use pvm_core::hierarchy::{build, train_on_stream};

use crate::frames::{FrameSource, Synthetic};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Frame directory (png/ppm) or raw blob.
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,

    /// Train on a seeded synthetic video instead of `--data`.
    #[arg(long, value_enum)]
    synthetic: Option<Synthetic>,

    /// Length of the synthetic video.
    #[arg(long, default_value_t = 10_000)]
    frames: usize,

    /// Passes over the data (defaults to `train.passes`).
    #[arg(long)]
    passes: Option<usize>,

    /// Checkpoint to write.
    #[arg(long)]
    out: PathBuf,

    /// Metrics CSV (defaults to `<out>.metrics.csv`).
    #[arg(long)]
    metrics: Option<PathBuf>,
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(config: &RunConfig, args: &TrainArgs) -> Result<()> {
    let spec = config.hierarchy_spec()?;
    let mut stream = spec.stream_config();
    stream.repeat_count = config.train.repeat_count;
    let source = match (&args.data, args.synthetic) {
        (Some(_), _) => FrameSource::open(args.data.as_deref(), &stream)?.expect("data given"),
        (None, Some(kind)) => {
            FrameSource::synthetic(kind, spec.field_size, args.frames, config.train.seed)
        }
        (None, None) => return Err(crate::usage("one of --data or --synthetic is required")),
    };
    let passes = args.passes.unwrap_or(config.train.passes);
    let mut model = build(&spec, config.train.seed)?;
    info!(
        "training {} levels, {} tiles, {} frames per pass, {passes} pass(es)",
        spec.levels.len(),
        spec.total_tiles(),
        source.len()
    );

    let start = Instant::now();
    let result = if passes == 0 {
        Ok(Default::default())
    } else {
        train_on_stream(&mut model, || source.iter(), passes, config.train.log_every)
    };
    let log = match result {
        Ok(log) => log,
        Err(e) => {
            let abort = with_suffix(&args.out, ".abort");
            match save_checkpoint(&model, &abort) {
                Ok(()) => warn!(
                    "training failed; partial model saved to {}",
                    abort.display()
                ),
                Err(se) => warn!("training failed and the partial model could not be saved: {se}"),
            }
            return Err(e.into());
        }
    };
    let secs = start.elapsed().as_secs_f64();

    save_checkpoint(&model, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let metrics = args
        .metrics
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".metrics.csv"));
    std::fs::write(&metrics, log.to_csv())
        .with_context(|| format!("writing {}", metrics.display()))?;
    for (l, steps) in log.update_steps.iter().enumerate() {
        info!("level {}: {} dictionary updates", l + 1, steps.len());
    }
    let rate = if secs > 0.0 {
        log.steps as f64 / secs
    } else {
        0.0
    };
    println!("{} steps in {secs:.2} s ({rate:.1} steps/s)", log.steps);
    println!("checkpoint: {}", args.out.display());
    println!("metrics: {}", metrics.display());
    Ok(())
}
