//! `pvm`: train, evaluate, track and analyze predictive vision models.

mod analyze;
mod classify;
mod frames;
mod plot;
mod track;
mod train;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use pvm_core::config::RunConfig;
use pvm_core::PvmError;

#[derive(Debug, Parser)]
#[command(name = "pvm", version, about = "Hierarchical predictive vision model")]
struct Cli {
    /// Run configuration file (`key = value` lines in sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set model.k=64`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Seed for initialization, classifiers and analyses (overrides `train.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 1 gives the reference deterministic schedule.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model on a frame directory, raw blob or synthetic stream.
    Train(train::TrainArgs),
    /// Per-layer classification accuracy of a trained model.
    Classify(classify::ClassifyArgs),
    /// Track an object through a video.
    Track(track::TrackArgs),
    /// Receptive-field and dynamics analyses.
    Analyze(analyze::AnalyzeArgs),
    /// Summarize a checkpoint.
    Inspect { checkpoint: PathBuf },
    /// Print the effective configuration.
    Config,
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut config = base.with_overrides(&cli.overrides)?;
    if let Some(seed) = cli.seed {
        config.train.seed = seed;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let config = effective_config(&cli)?;
    match cli.command {
        Command::Train(args) => train::run(&config, &args),
        Command::Classify(args) => classify::run(&config, &args),
        Command::Track(args) => track::run(&config, &args),
        Command::Analyze(args) => analyze::run(&config, &args),
        Command::Inspect { checkpoint } => inspect(&checkpoint),
        Command::Config => {
            print!("{}", config.to_toml());
            Ok(())
        }
    }
}

fn inspect(path: &std::path::Path) -> Result<()> {
    let model = pvm_core::checkpoint::load_checkpoint(path)?;
    let spec = &model.spec;
    println!("checkpoint: {}", path.display());
    println!(
        "field {}px, tile {}px, {} frame(s) per input, context {:?}",
        spec.field_size, spec.tile_size, spec.frames_per_input, spec.context
    );
    println!("steps presented: {}", model.step);
    println!("level  grid   input_dim  K    N   T   dict_updates  next_interval  complex_t");
    for (l, s) in model.levels.iter().zip(&spec.levels) {
        println!(
            "{:<6} {:<6} {:<10} {:<4} {:<3} {:<3} {:<13} {:<14} {}",
            s.level_index + 1,
            format!("{}x{}", s.tiles_x, s.tiles_y),
            s.input_dim,
            s.simple.k,
            s.simple.n,
            s.simple.t_max,
            l.dictionary.updates_done(),
            l.dictionary.next_interval(),
            l.weights.t,
        );
    }
    println!(
        "total tiles {}, total cells {}",
        spec.total_tiles(),
        spec.total_cells()
    );
    Ok(())
}

/// 1 usage, 2 data, 3 numeric.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<PvmError>() {
            return pvm_code(e);
        }
        if cause.is::<UsageError>() {
            return 1;
        }
    }
    2
}

fn pvm_code(e: &PvmError) -> u8 {
    match e {
        PvmError::Config(_) | PvmError::InvalidArgument(_) | PvmError::DegenerateBox { .. } => 1,
        PvmError::NonFinite(_) | PvmError::Numeric(_) => 3,
        PvmError::Tile { source, .. } => pvm_code(source),
        _ => 2,
    }
}

/// A bad combination of arguments detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
