use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use log::{info, warn};
use pvm_core::checkpoint::load_checkpoint;
use pvm_core::config::RunConfig;
use pvm_core::ingest::{load_frame_sequence, load_groundtruth, StreamConfig};
use pvm_core::tracker::{accuracy_curve, area_under, grid, run_tracker, success_curve, TrackRun};
use pvm_core::{BoundingBox, RawFrame};
use serde_json::json;

use crate::plot::curve_plot;

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    checkpoint: PathBuf,

    /// Clip directory: frames directly inside it or in `img/`.
    #[arg(long)]
    video: PathBuf,

    /// Ground truth, one `x,y,w,h` line per frame (defaults to
    /// `<video>/groundtruth.txt`).
    #[arg(long)]
    groundtruth: Option<PathBuf>,

    /// Priming box `x,y,w,h` when there is no ground truth.
    #[arg(long, value_name = "X,Y,W,H")]
    init: Option<String>,

    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn parse_box(s: &str) -> Result<BoundingBox> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| crate::usage(format!("bad box `{s}`: {e}")))?;
    if v.len() != 4 {
        return Err(crate::usage(format!("box `{s}` needs four values")));
    }
    Ok(BoundingBox::new(v[0], v[1], v[2], v[3]))
}

fn load_clip(dir: &Path, field: usize, tile: usize) -> Result<Vec<RawFrame>> {
    let img = dir.join("img");
    let frames_dir = if img.is_dir() { img } else { dir.to_path_buf() };
    let stream = StreamConfig {
        field_size: field,
        tile_size: tile,
        ..Default::default()
    };
    let seq = load_frame_sequence(&frames_dir, &stream)?;
    Ok((0..seq.len())
        .map(|i| seq.source_frame(i))
        .collect::<pvm_core::Result<_>>()?)
}

pub fn run(config: &RunConfig, args: &TrackArgs) -> Result<()> {
    let gt_path = args
        .groundtruth
        .clone()
        .unwrap_or_else(|| args.video.join("groundtruth.txt"));
    let ground_truth = if gt_path.exists() {
        Some(load_groundtruth(&gt_path)?)
    } else {
        warn!(
            "no ground truth at {}; writing boxes only",
            gt_path.display()
        );
        None
    };
    let init = match (&args.init, &ground_truth) {
        (Some(s), _) => parse_box(s)?,
        (None, Some(gt)) => *gt
            .first()
            .ok_or_else(|| crate::usage("ground truth is empty"))?,
        (None, None) => return Err(crate::usage("--init is required without ground truth")),
    };

    let mut model = load_checkpoint(&args.checkpoint)?;
    let frames = load_clip(&args.video, model.spec.field_size, model.spec.tile_size)?;
    info!("{} frames", frames.len());
    let boxes = run_tracker(&mut model, &frames, &init, &config.tracker())?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let run = TrackRun::new(
        boxes.clone(),
        ground_truth.clone().unwrap_or_else(|| boxes.clone()),
    )?;
    let boxes_csv = args.out.join("boxes.csv");
    std::fs::write(&boxes_csv, run.to_csv())
        .with_context(|| format!("writing {}", boxes_csv.display()))?;
    println!("boxes: {}", boxes_csv.display());

    if ground_truth.is_some() {
        let success = success_curve(&run, &grid(0.0, 1.0, 100))?;
        let accuracy = accuracy_curve(&run, &grid(0.05, 2.0, 39))?;
        let pairs = |c: &[(f64, f64)]| c.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>();
        let metrics = json!({
            "frames": run.scored_frames(),
            "success_auc": area_under(&success),
            "success": pairs(&success),
            "accuracy": pairs(&accuracy),
        });
        let path = args.out.join("metrics.json");
        std::fs::write(&path, serde_json::to_string_pretty(&metrics)?)
            .with_context(|| format!("writing {}", path.display()))?;
        curve_plot(&args.out.join("success.png"), &success)?;
        curve_plot(&args.out.join("accuracy.png"), &accuracy)?;
        println!("area under success: {:.4}", area_under(&success));
        println!("metrics: {}", path.display());
    }
    Ok(())
}
