use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use log::info;
use pvm_core::checkpoint::load_checkpoint;
use pvm_core::config::RunConfig;
use pvm_core::readout::{collect_all_layers, train_classifier, PerceptronClassifier};
use pvm_core::stimuli::sprite_of_class;
use pvm_core::RawFrame;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::plot::bar_plot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stimuli {
    /// Sprites of distinct shape and color, randomly scaled and placed.
    Sprites,
    /// Uniform fields, one color per class.
    Colors,
}

const COLORS: [[u8; 3]; 6] = [
    [255, 0, 0],
    [0, 0, 255],
    [0, 200, 0],
    [255, 255, 0],
    [0, 255, 255],
    [255, 0, 255],
];

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    checkpoint: PathBuf,

    /// Report CSV; the bar plot is written next to it as `.png`.
    #[arg(long)]
    out: PathBuf,

    /// Number of classes (defaults to `classify.classes`).
    #[arg(long)]
    classes: Option<usize>,

    #[arg(long, value_enum, default_value_t = Stimuli::Sprites)]
    stimuli: Stimuli,

    /// Score randomly initialized classifiers instead of trained ones.
    #[arg(long)]
    untrained_classifier: bool,
}

fn stimulus_set(
    kind: Stimuli,
    field: usize,
    classes: usize,
    per_class: usize,
    seed: u64,
) -> Vec<(RawFrame, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..classes * per_class)
        .map(|i| {
            let class = i % classes;
            let frame = match kind {
                Stimuli::Sprites => sprite_of_class(field, class, &mut rng),
                Stimuli::Colors => RawFrame::filled(field, field, COLORS[class]),
            };
            (frame, class)
        })
        .collect()
}

pub fn run(config: &RunConfig, args: &ClassifyArgs) -> Result<()> {
    let classes = args.classes.unwrap_or(config.classify.classes);
    if classes < 2 {
        return Err(crate::usage("at least two classes are needed"));
    }
    if args.stimuli == Stimuli::Colors && classes > COLORS.len() {
        return Err(crate::usage(format!(
            "color stimuli support at most {} classes",
            COLORS.len()
        )));
    }
    let mut model = load_checkpoint(&args.checkpoint)?;
    let field = model.spec.field_size;
    let c = &config.classify;
    let seed = config.train.seed;
    let train = stimulus_set(args.stimuli, field, classes, c.train_per_class, seed);
    let test = stimulus_set(
        args.stimuli,
        field,
        classes,
        c.test_per_class,
        seed ^ 0x5EED,
    );
    info!(
        "{} training and {} test stimuli over {classes} classes",
        train.len(),
        test.len()
    );
    let train_sets = collect_all_layers(&mut model, &train, classes, c.settle)?;
    let test_sets = collect_all_layers(&mut model, &test, classes, c.settle)?;

    let mut csv = String::from("layer,accuracy,n_examples\n");
    let mut accuracies = Vec::with_capacity(train_sets.len());
    for ((sel, tr), (_, te)) in train_sets.iter().zip(&test_sets) {
        let clf = if args.untrained_classifier {
            PerceptronClassifier::random(tr.dim, classes, seed)
        } else {
            train_classifier(tr, &config.classifier())?
        };
        let acc = clf.accuracy(te)?;
        println!("{:<4} {:.4}", sel.name(), acc);
        csv.push_str(&format!("{},{acc},{}\n", sel.name(), te.len()));
        accuracies.push(acc);
    }
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;
    let png = args.out.with_extension("png");
    bar_plot(&png, &accuracies, Some(1.0 / classes as f64))?;
    println!("report: {}", args.out.display());
    println!("plot: {}", png.display());
    Ok(())
}
