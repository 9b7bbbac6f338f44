//! Acceptance run: one line per criterion, `PASS` or `FAIL`, with the
//! measured numbers. Criteria listed in `KNOWN_FAILURES` are reported as
//! failures but do not fail the target; anything else failing does.

use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvm_core::analysis::nelder_mead::{minimize, NelderMeadOptions};
use pvm_core::analysis::optimize::optimize_stimulus;
use pvm_core::analysis::pca::{frame_vector, pca_basis};
use pvm_core::analysis::selectivity::still_selectivity;
use pvm_core::analysis::stability::stability_report;
use pvm_core::analysis::stc::{abs_cosine, stc_generic};
use pvm_core::analysis::tuning::{phase_modulation, TuningOptions};
use pvm_core::analysis::CellRef;
use pvm_core::checkpoint::{model_from_container, model_to_container};
use pvm_core::hierarchy::{build, ContextMode, HierarchySpec, Layer, ModelState};
use pvm_core::readout::{
    collect_activations, train_classifier, ClassifierConfig, LayerSelector, PerceptronClassifier,
};
use pvm_core::sparse_coding::{
    asc_encode, atom_norms, coordinate_sweep, Dictionary, SimpleParams, UpdateSchedule,
};
use pvm_core::stimuli::{natural_patches, DriftingGratings, MovingSprites};
use pvm_core::tracker::{accuracy_curve, grid, success_curve, BoundingBox, TrackRun};
use pvm_core::RawFrame;

/// Criteria that fail at desk scale for documented reasons (see README).
const KNOWN_FAILURES: &[u32] = &[1, 5, 8];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        id,
        pass,
        detail: detail.into(),
    }
}

fn report(o: &Outcome, elapsed: Duration) {
    let tag = match (o.pass, KNOWN_FAILURES.contains(&o.id)) {
        (true, _) => "PASS",
        (false, true) => "FAIL (known)",
        (false, false) => "FAIL",
    };
    println!(
        "criterion {:>2}: {tag:<12} {} [{:.1}s]",
        o.id,
        o.detail,
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Sparse coding

fn trained_patch_dictionary() -> (Dictionary, SimpleParams) {
    let params = SimpleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut dict = Dictionary::random(300, params.k, UpdateSchedule::default(), &mut rng);
    for x in natural_patches(20_000, 10, 12) {
        let code = asc_encode(&x, &dict, &params).unwrap();
        dict.adapt_lambda_scale(&code);
        dict.accumulate_and_maybe_update(&x, &code).unwrap();
    }
    (dict, params)
}

fn criteria_1_2(dict: &Dictionary, params: &SimpleParams) -> (Outcome, Outcome) {
    let patches = natural_patches(1000, 10, 99);
    let start = Instant::now();
    let codes: Vec<_> = patches
        .iter()
        .map(|x| asc_encode(x, dict, params).unwrap())
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let at_n: Vec<usize> = (0..codes.len())
        .filter(|&i| codes[i].active_count() == params.n)
        .collect();
    let nonneg = codes.iter().all(|c| c.a.iter().all(|&v| v >= 0.0));
    let rate = at_n.len() as f64 / codes.len() as f64;
    let c1 = outcome(
        1,
        rate >= 0.95 && nonneg && secs < 60.0,
        format!(
            "exit at N={} in {:.1}% of 1000 patches (need >= 95%), a >= 0: {nonneg}, encode time {secs:.2}s",
            params.n,
            100.0 * rate
        ),
    );

    let mut worst: f64 = 1.0;
    let mut parts = Vec::new();
    for gamma in [0.25, 4.0] {
        let kept = at_n
            .iter()
            .filter(|&&i| {
                let x: Vec<f64> = patches[i].iter().map(|v| v * gamma).collect();
                asc_encode(&x, dict, params).unwrap().active_count() == params.n
            })
            .count() as f64
            / at_n.len().max(1) as f64;
        worst = worst.min(kept);
        parts.push(format!("gamma {gamma}: {:.1}%", 100.0 * kept));
    }
    let c2 = outcome(
        2,
        !at_n.is_empty() && worst >= 0.95,
        format!(
            "{} of N-exiting patches still exit at N (need >= 95%)",
            parts.join(", ")
        ),
    );
    (c1, c2)
}

fn criterion_3() -> Outcome {
    // The sweep's threshold t minimizes ½‖x − Da‖² + t‖a‖₁, i.e. the stated
    // objective ‖x − Da‖² + λ‖a‖₁ with λ = 2t.
    let (m, k) = (6, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_rise: f64 = f64::NEG_INFINITY;
    let mut worst_z: f64 = 0.0;
    let mut updates = 0usize;
    for _ in 0..200 {
        let mut atoms = Array2::<f64>::from_shape_fn((k, m), |_| rng.random_range(-1.0..1.0));
        for mut row in atoms.rows_mut() {
            let n = row.dot(&row).sqrt();
            row /= n;
        }
        let dict = Dictionary::from_atoms(atoms.clone(), UpdateSchedule::default());
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let lambda = rng.random_range(0.01..1.0);
        let threshold = lambda / 2.0;
        let objective = |a: &[f64]| {
            let mut r = x.clone();
            for (i, &ai) in a.iter().enumerate() {
                for j in 0..m {
                    r[j] -= ai * atoms[[i, j]];
                }
            }
            r.iter().map(|v| v * v).sum::<f64>() + lambda * a.iter().map(|v| v.abs()).sum::<f64>()
        };
        let xd = |i: usize| (0..m).map(|j| x[j] * atoms[[i, j]]).sum::<f64>();
        let mut a = vec![0.0; k];
        let mut z: Vec<f64> = (0..k).map(xd).collect();
        let mut prev = objective(&a);
        for _ in 0..30 {
            coordinate_sweep(&mut a, &mut z, dict.gram(), threshold, |_, a, z| {
                let now = objective(a);
                worst_rise = worst_rise.max(now - prev);
                prev = now;
                updates += 1;
                for (i, zi) in z.iter().enumerate() {
                    let ae: f64 = (0..k).map(|j| a[j] * dict.gram()[[j, i]]).sum();
                    worst_z = worst_z.max((zi - (xd(i) - ae)).abs());
                }
            });
        }
    }
    outcome(
        3,
        worst_rise <= 1e-10 && worst_z <= 1e-6,
        format!(
            "{updates} coordinate updates: max objective rise {worst_rise:.2e} (need <= 1e-10), max |z - (xD - aE)| {worst_z:.2e} (need <= 1e-6)"
        ),
    )
}

// ---------------------------------------------------------------------------
// Desk model trained on drifting gratings

fn desk_spec() -> HierarchySpec {
    HierarchySpec::pyramid(
        20,
        10,
        1,
        2,
        SimpleParams {
            k: 64,
            n: 8,
            t_max: 25,
        },
    )
    .unwrap()
}

struct DeskRun {
    model: ModelState,
    pred: Vec<Vec<f64>>,
    update_steps: Vec<Vec<u64>>,
    worst_norm: f64,
    train_time: Duration,
}

fn train_desk(steps: usize) -> DeskRun {
    let mut model = build(&desk_spec(), 1).unwrap();
    let levels = model.num_levels();
    let mut pred = vec![Vec::new(); levels];
    let mut update_steps = vec![Vec::new(); levels];
    let mut worst_norm: f64 = 0.0;
    let start = Instant::now();
    for (i, f) in DriftingGratings::new(20, 100, 5).take(steps).enumerate() {
        let r = model.present(&[f], true).unwrap();
        for l in 0..levels {
            if let Some(p) = r.pred_mse[l] {
                pred[l].push(p);
            }
            if r.dictionary_updates[l] {
                update_steps[l].push(i as u64 + 1);
                for n in atom_norms(&model.levels[l].dictionary) {
                    worst_norm = worst_norm.max((n - 1.0).abs());
                }
            }
        }
    }
    DeskRun {
        model,
        pred,
        update_steps,
        worst_norm,
        train_time: start.elapsed(),
    }
}

fn criterion_4(run: &DeskRun) -> Outcome {
    let mut expected = Vec::new();
    let (mut at, mut interval) = (0u64, 1000u64);
    while at + interval <= 50_000 {
        at += interval;
        expected.push(at);
        interval = (interval as f64 * 1.1).round() as u64;
    }
    let schedule_ok = run.update_steps.iter().all(|s| *s == expected);
    let head: Vec<u64> = run.update_steps[0].iter().take(3).copied().collect();
    outcome(
        4,
        schedule_ok && head == [1000, 2100, 3310] && run.worst_norm <= 1e-6,
        format!(
            "{} update events per level, first {:?}, schedule matches: {schedule_ok}, max |norm - 1| {:.2e}",
            run.update_steps[0].len(),
            head,
            run.worst_norm
        ),
    )
}

fn decile_mean(p: &[f64], which: usize) -> f64 {
    let d = p.len() / 10;
    let s = &p[which * d..(which + 1) * d];
    s.iter().sum::<f64>() / s.len() as f64
}

fn criterion_6(run: &DeskRun) -> Outcome {
    let mut pass = run.train_time < Duration::from_secs(20 * 60);
    let mut parts = Vec::new();
    for (l, p) in run.pred.iter().enumerate() {
        let ratio = decile_mean(p, 9) / decile_mean(p, 0);
        let settled = decile_mean(p, 9) / decile_mean(p, 1);
        pass &= ratio <= 0.7;
        parts.push(format!(
            "level {}: last/first decile {ratio:.3} (second-decile baseline {settled:.3})",
            l + 1
        ));
    }
    outcome(
        6,
        pass,
        format!(
            "{} (need <= 0.70), training {:.1}s",
            parts.join("; "),
            run.train_time.as_secs_f64()
        ),
    )
}

fn criterion_7(model: &mut ModelState) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for level in 0..model.num_levels() {
        let r = phase_modulation(model, level, &TuningOptions::default()).unwrap();
        let (s, c) = (r.median_simple, r.median_complex);
        pass &= matches!((s, c), (Some(s), Some(c)) if c < s);
        parts.push(format!(
            "level {}: Simple {:.3} ({} cells), Complex {:.3} ({} cells)",
            level + 1,
            s.unwrap_or(f64::NAN),
            r.simple.len(),
            c.unwrap_or(f64::NAN),
            r.complex.len()
        ));
    }
    outcome(7, pass, format!("median modulation {}", parts.join("; ")))
}

fn criterion_13(model: &mut ModelState) -> Outcome {
    let probe: Vec<RawFrame> = DriftingGratings::new(20, 100, 77).take(1000).collect();
    let r = stability_report(model, &probe).unwrap();
    let per: Vec<String> = r
        .levels
        .iter()
        .map(|l| format!("level {}: {:.4}", l.level + 1, l.max_real))
        .collect();
    outcome(
        13,
        r.max_real() < 1.0,
        format!("max eigenvalue real part {} (need < 1)", per.join(", ")),
    )
}

fn criterion_5(model: &mut ModelState) -> Outcome {
    let levels = model.num_levels();
    let mut sums: Vec<[Vec<f64>; 2]> = Vec::new();
    let mut active: Vec<[Vec<usize>; 2]> = Vec::new();
    let frames = 20_000;
    for f in DriftingGratings::new(20, 100, 9).take(frames) {
        model.present(&[f], true).unwrap();
        for l in 0..levels {
            let simple: Vec<f64> = model.levels[l]
                .tiles
                .iter()
                .flat_map(|t| t.simple[..t.code.len()].to_vec())
                .collect();
            let complex: Vec<f64> = model.activations(l, Layer::Complex).concat();
            if sums.len() <= l {
                sums.push([vec![0.0; simple.len()], vec![0.0; complex.len()]]);
                active.push([vec![0; simple.len()], vec![0; complex.len()]]);
            }
            for (k, v) in [simple, complex].into_iter().enumerate() {
                for (i, x) in v.iter().enumerate() {
                    sums[l][k][i] += x * x;
                    if *x != 0.0 {
                        active[l][k][i] += 1;
                    }
                }
            }
        }
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for l in 0..levels {
        for (k, name) in ["Simple", "Complex"].iter().enumerate() {
            let rms: Vec<f64> = sums[l][k]
                .iter()
                .zip(&active[l][k])
                .filter(|(_, &a)| a * 100 >= frames)
                .map(|(s, _)| (s / frames as f64).sqrt())
                .collect();
            let out = rms.iter().filter(|r| !(0.7..=1.3).contains(*r)).count();
            let lo = rms.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = rms.iter().cloned().fold(0.0, f64::max);
            pass &= out == 0;
            parts.push(format!(
                "L{} {name} {out}/{} outside [{lo:.2}, {hi:.2}]",
                l + 1,
                rms.len()
            ));
        }
    }
    outcome(
        5,
        pass,
        format!("per-cell RMS over 20K frames: {}", parts.join("; ")),
    )
}

fn criterion_12(model: &mut ModelState) -> Outcome {
    // Quadratic with known optimum in 20 dimensions.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let target: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
    let scales: Vec<f64> = (0..20).map(|i| 1.0 + i as f64 * 0.5).collect();
    let f = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&target)
            .zip(&scales)
            .map(|((a, b), s)| s * (a - b).powi(2))
            .sum()
    };
    let r = minimize(f, &[0.0; 20], &NelderMeadOptions::default());
    let err =
        r.x.iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    let quad_ok = err <= 1e-3 && r.iterations <= 2000;

    // Stimulus optimization on the trained desk model.
    let frames: Vec<RawFrame> = DriftingGratings::new(20, 10, 41).take(2000).collect();
    let samples: Vec<Vec<f64>> = frames.iter().map(frame_vector).collect();
    let basis = pca_basis(&samples, 20, 1).unwrap();
    let init = &frames[7];
    let mut cell = None;
    for c in 0..model.spec.levels[0].simple.k {
        let cref = CellRef {
            level: 0,
            layer: Layer::Complex,
            tile: 0,
            cell: c,
        };
        if still_selectivity(model, init, cref, 3).unwrap_or(0.0) > 0.0 {
            cell = Some(cref);
            break;
        }
    }
    let (opt_ok, opt_detail) = match cell {
        Some(cref) => {
            let opts = NelderMeadOptions {
                max_iter: 300,
                restarts: 0,
                ..Default::default()
            };
            let o = optimize_stimulus(model, cref, &basis, init, 3, &opts).unwrap();
            (
                o.s >= o.s_init,
                format!("cell {}: s {:.4} from init {:.4}", cref.cell, o.s, o.s_init),
            )
        }
        None => (false, "no responsive cell on the init frame".to_string()),
    };
    outcome(
        12,
        quad_ok && opt_ok,
        format!(
            "quadratic max error {err:.2e} in {} iterations (need <= 1e-3, <= 2000); {opt_detail}",
            r.iterations
        ),
    )
}

fn criterion_14(model: &mut ModelState) -> Outcome {
    let bytes = model_to_container(model).to_bytes();
    let loaded =
        model_from_container(&pvm_core::checkpoint::Container::from_bytes(&bytes).unwrap())
            .unwrap();
    let again = model_to_container(&loaded).to_bytes();
    let identical_state = loaded == *model;
    let mut copy = loaded;
    let mut replay_ok = true;
    for f in DriftingGratings::new(20, 100, 123).take(200) {
        model.present(std::slice::from_ref(&f), false).unwrap();
        copy.present(&[f], false).unwrap();
        for l in 0..model.num_levels() {
            for layer in [Layer::Simple, Layer::Complex] {
                replay_ok &= model.activations(l, layer) == copy.activations(l, layer);
            }
        }
    }
    outcome(
        14,
        bytes == again && identical_state && replay_ok,
        format!(
            "{} bytes, re-save identical: {}, loaded state equal: {identical_state}, 200-frame frozen replay identical: {replay_ok}",
            bytes.len(),
            bytes == again
        ),
    )
}

// ---------------------------------------------------------------------------
// Context ablation

fn sprite_spec(context: ContextMode) -> HierarchySpec {
    let mut spec = HierarchySpec::pyramid(
        8,
        4,
        1,
        2,
        SimpleParams {
            k: 64,
            n: 8,
            t_max: 25,
        },
    )
    .unwrap();
    spec.context = context;
    spec
}

fn level2_accuracy(context: ContextMode, seed: u64) -> f64 {
    let classes = 5;
    let mut model = build(&sprite_spec(context), seed).unwrap();
    for f in MovingSprites::new(8, classes, 2, 50, seed).take(20_000) {
        model.present(&[f], true).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let mut balanced = |per_class: usize| -> Vec<(RawFrame, usize)> {
        (0..per_class * classes)
            .map(|i| {
                let class = i % classes;
                (
                    pvm_core::stimuli::sprite_of_class(8, class, &mut rng),
                    class,
                )
            })
            .collect()
    };
    let train = balanced(100);
    let test = balanced(50);
    let sel = LayerSelector {
        level: 1,
        layer: Layer::Complex,
    };
    let tr = collect_activations(&mut model, &train, classes, sel, 3).unwrap();
    let te = collect_activations(&mut model, &test, classes, sel, 3).unwrap();
    let clf = train_classifier(
        &tr,
        &ClassifierConfig {
            seed,
            ..Default::default()
        },
    )
    .unwrap();
    clf.accuracy(&te).unwrap()
}

fn criterion_8() -> Outcome {
    let mut wins = 0;
    let mut parts = Vec::new();
    for seed in 0..5 {
        let with = level2_accuracy(ContextMode::Full, seed);
        let without = level2_accuracy(ContextMode::NoLateralFeedback, seed);
        if with > without {
            wins += 1;
        }
        parts.push(format!("{:.2}/{:.2}", with, without));
    }
    outcome(
        8,
        wins >= 4,
        format!(
            "context beats no-context in {wins}/5 seeds (need >= 4); accuracy with/without: {}",
            parts.join(" ")
        ),
    )
}

// ---------------------------------------------------------------------------
// Readout and tracking metrics

fn criterion_9() -> Outcome {
    let classes = 41;
    let per_class = 123;
    let mut model = build(&sprite_spec(ContextMode::Full), 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let stimuli: Vec<(RawFrame, usize)> = (0..classes * per_class)
        .map(|i| {
            let class = i % classes;
            (
                pvm_core::stimuli::sprite_of_class(8, class, &mut rng),
                class,
            )
        })
        .collect();
    let sel = LayerSelector {
        level: 1,
        layer: Layer::Complex,
    };
    let data = collect_activations(&mut model, &stimuli, classes, sel, 1).unwrap();
    let clf = PerceptronClassifier::random(data.dim, classes, 9);
    let acc = clf.accuracy(&data).unwrap();
    let chance = 1.0 / classes as f64;
    outcome(
        9,
        data.len() >= 5000 && (acc - chance).abs() <= 0.01,
        format!(
            "untrained accuracy {:.2}% on {} examples (chance {:.2}% +- 1%)",
            100.0 * acc,
            data.len(),
            100.0 * chance
        ),
    )
}

fn criterion_10() -> Outcome {
    let thetas = grid(0.0, 0.999, 200);
    let scales = grid(0.1, 3.0, 60);
    let gt: Vec<BoundingBox> = (0..20)
        .map(|i| BoundingBox::new(i as f64, 2.0 * i as f64, 10.0, 6.0))
        .collect();
    let perfect = TrackRun::new(gt.clone(), gt.clone()).unwrap();
    let perfect_ok = success_curve(&perfect, &thetas)
        .unwrap()
        .iter()
        .all(|p| p.1 == 1.0)
        && accuracy_curve(&perfect, &[1.0]).unwrap()[0].1 == 1.0;

    let shifted: Vec<BoundingBox> = gt
        .iter()
        .map(|b| BoundingBox::new(b.x + b.w / 2.0, b.y, b.w, b.h))
        .collect();
    let half = TrackRun::new(shifted, gt.clone()).unwrap();
    let third = 1.0 / 3.0;
    let s = success_curve(&half, &[third - 1e-9, third, third + 1e-9]).unwrap();
    let step_ok = s[0].1 == 1.0 && s[1].1 == 0.0 && s[2].1 == 0.0;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mono_ok = true;
    for _ in 0..200 {
        let n = rng.random_range(2..30);
        let rand_box = |rng: &mut ChaCha8Rng| {
            if rng.random::<f64>() < 0.1 {
                BoundingBox::absent()
            } else {
                BoundingBox::new(
                    rng.random_range(0.0..50.0),
                    rng.random_range(0.0..50.0),
                    rng.random_range(1.0..20.0),
                    rng.random_range(1.0..20.0),
                )
            }
        };
        let p: Vec<_> = (0..n).map(|_| rand_box(&mut rng)).collect();
        let g: Vec<_> = (0..n).map(|_| rand_box(&mut rng)).collect();
        let run = TrackRun::new(p, g).unwrap();
        let sc = success_curve(&run, &thetas).unwrap();
        let ac = accuracy_curve(&run, &scales).unwrap();
        mono_ok &= sc.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
        mono_ok &= ac.windows(2).all(|w| w[1].1 + 1e-12 >= w[0].1);
    }
    outcome(
        10,
        perfect_ok && step_ok && mono_ok,
        format!(
            "perfect run S=1 and A(1)=1: {perfect_ok}; half-overlap step at 1/3: {step_ok}; monotone on 200 fuzzed runs: {mono_ok}"
        ),
    )
}

fn criterion_11() -> Outcome {
    let dim = 300;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    w.iter_mut().for_each(|v| *v /= n);
    let cell = |x: &Array2<f64>| -> pvm_core::Result<Vec<f64>> {
        Ok(x.rows()
            .into_iter()
            .map(|r| r.dot(&ndarray::ArrayView1::from(&w[..])).max(0.0))
            .collect())
    };
    let frames = 500_000;
    let a = stc_generic(dim, frames, 5, cell).unwrap();
    let b = stc_generic(dim, frames, 5, cell).unwrap();
    let cos = abs_cosine(&a.excitatory[0], &w);
    let same = a.eigenvalues == b.eigenvalues && a.excitatory == b.excitatory;
    outcome(
        11,
        cos >= 0.9 && same,
        format!("top eigenvector |cos| to planted filter {cos:.4} over {frames} frames (need >= 0.9); rerun identical: {same}"),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    // Under `cargo test -- --list` or filters, stay quiet.
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    println!("acceptance criteria");
    let mut results = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> Vec<Outcome>| {
        let start = Instant::now();
        let outs = f();
        let el = start.elapsed();
        for o in &outs {
            report(o, el);
        }
        results.extend(outs);
    };

    timed(&mut || {
        let (dict, params) = trained_patch_dictionary();
        let (a, b) = criteria_1_2(&dict, &params);
        vec![a, b]
    });
    timed(&mut || vec![criterion_3()]);
    let mut run = train_desk(50_000);
    timed(&mut || vec![criterion_4(&run), criterion_6(&run)]);
    timed(&mut || vec![criterion_7(&mut run.model)]);
    timed(&mut || vec![criterion_13(&mut run.model)]);
    timed(&mut || vec![criterion_12(&mut run.model)]);
    timed(&mut || vec![criterion_14(&mut run.model)]);
    timed(&mut || vec![criterion_5(&mut run.model)]);
    timed(&mut || vec![criterion_8()]);
    timed(&mut || vec![criterion_9()]);
    timed(&mut || vec![criterion_10()]);
    timed(&mut || vec![criterion_11()]);

    results.sort_by_key(|o| o.id);
    let passed = results.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria pass", results.len());
    let unexpected: Vec<u32> = results
        .iter()
        .filter(|o| !o.pass && !KNOWN_FAILURES.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let fixed: Vec<u32> = results
        .iter()
        .filter(|o| o.pass && KNOWN_FAILURES.contains(&o.id))
        .map(|o| o.id)
        .collect();
    if !fixed.is_empty() {
        println!("listed as known failures but now passing: {fixed:?}");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
