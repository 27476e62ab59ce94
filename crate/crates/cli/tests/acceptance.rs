//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` print their FAIL line with the
//! measured numbers but do not fail the run; any other failure does, and so
//! does a known failure that starts passing (the list must be updated).

use std::cell::RefCell;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use shiftguard::pipeline::{self, BenchRow};
use shiftguard::RunConfig;
use shiftguard_core::controller::{run_selection, ControllerConfig, RecoveryReport, StopReason};
use shiftguard_core::haar;
use shiftguard_core::learn::{a2c_train, mlp_backward, Bandit, Classifier, Head, Mlp, OptimizerKind, Policy, TrainHp};
use shiftguard_core::metrics::{
    assignment, make_projection, pearson, sliced_divergence, wasserstein_exact, wasserstein_sliced, Divergence,
    DistanceEstimator, Estimator, EstimatorConfig, PointCloud, ProjectionFamily,
};
use shiftguard_core::operability::{
    generate_labels, train_operability, AlwaysOperable, GateDecision, OperabilityGate,
};
use shiftguard_core::learn::TreeParams;
use shiftguard_core::rng::{mix, rng, Rng};
use shiftguard_core::synth::synth_dataset;
use shiftguard_core::transforms::{action_library, apply, surrogate_cells, SurrogateFamily};
use shiftguard_core::{Image, SampleSet, StateVector};

/// Criteria expected to fail, with the reason recorded in the decisions
/// ledger.
const KNOWN_FAILURES: &[u32] = &[8, 9, 11];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian_cloud(r: &mut Rng, n: usize, dim: usize, shift: f64, scale: f64) -> PointCloud {
    let data = (0..n * dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(r);
            shift + scale * z
        })
        .collect::<Vec<f64>>();
    PointCloud::new(dim, data).unwrap()
}

fn c1_projection_contraction() -> Outcome {
    let start = Instant::now();
    let mut r = rng(0xC1);
    let (mut ok, mut total, mut worst) = (0usize, 0usize, f64::NEG_INFINITY);
    for pair in 0..200u64 {
        let a = gaussian_cloud(&mut r, 32, 16, 0.0, 1.0);
        let shift = r.random_range(0.0..2.0);
        let scale = r.random_range(0.5..2.0);
        let b = gaussian_cloud(&mut r, 32, 16, shift, scale);
        for m in [2, 4, 8] {
            let proj = make_projection(16, m, ProjectionFamily::Orthonormal, mix(pair, m as u64)).unwrap();
            let (pa, pb) = (proj.project_cloud(&a).unwrap(), proj.project_cloud(&b).unwrap());
            for p in [1, 2] {
                let gap = wasserstein_exact(&pa, &pb, p).unwrap() - wasserstein_exact(&a, &b, p).unwrap();
                worst = worst.max(gap);
                total += 1;
                ok += usize::from(gap <= 1e-9);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ok == total && secs < 30.0,
        format!("{ok}/{total} projected <= unprojected + 1e-9 (max gap {worst:.3e}), {secs:.1}s (limit 30s)"),
    )
}

fn brute_force_min(cost: &[f64], n: usize) -> f64 {
    fn go(cost: &[f64], n: usize, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                go(cost, n, row + 1, used, acc + cost[row * n + j], best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
    best
}

fn c2_hungarian_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(0xC2);
    let n = 6;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let a = gaussian_cloud(&mut r, n, 3, 0.0, 1.0);
        let b = gaussian_cloud(&mut r, n, 3, 0.5, 1.0);
        let p = if i % 2 == 0 { 1 } else { 2 };
        let cost: Vec<f64> = a
            .points()
            .flat_map(|x| {
                b.points()
                    .map(|y| x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt().powi(p))
                    .collect::<Vec<_>>()
            })
            .collect();
        let (_, hungarian) = assignment(&cost, n);
        let brute = brute_force_min(&cost, n);
        worst = worst.max((hungarian - brute).abs());
        let w = wasserstein_exact(&a, &b, p as u32).unwrap();
        worst = worst.max((w - (brute / n as f64).powf(1.0 / p as f64)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && secs < 5.0,
        format!("50 instances, max |hungarian - brute force| = {worst:.1e} (limit 1e-12), {secs:.2}s (limit 5s)"),
    )
}

fn ranking(xs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    idx
}

fn c3_sliced_vs_exact() -> Outcome {
    let sigmas = [0.5, 1.0, 2.0];
    let mut agree = 0;
    for trial in 0..100u64 {
        let mut r = rng(mix(0xC3, trial));
        let reference = gaussian_cloud(&mut r, 32, 4, 0.0, 1.0);
        let mut exact = Vec::new();
        let mut sliced = Vec::new();
        for s in sigmas {
            let fresh = gaussian_cloud(&mut r, 32, 4, 0.0, 1.0);
            let noisy: Vec<f64> = fresh
                .data()
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut r);
                    v + s * z
                })
                .collect();
            let shifted = PointCloud::new(4, noisy).unwrap();
            exact.push(wasserstein_exact(&reference, &shifted, 1).unwrap());
            sliced.push(wasserstein_sliced(&reference, &shifted, 1, 512, mix(trial, 7)).unwrap());
        }
        agree += usize::from(ranking(&exact) == ranking(&sliced));
    }
    outcome(agree >= 95, format!("{agree}/100 trials rank three noise severities identically (need >= 95)"))
}

fn c4_haar() -> Outcome {
    let mut r = rng(0xC4);
    let (mut round, mut energy) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let w = 2 * r.random_range(1..20);
        let h = 2 * r.random_range(1..20);
        let px: Vec<f64> = (0..w * h).map(|_| r.random_range(0.0..1.0)).collect();
        let planes = haar::forward(&px, w, h);
        let back = haar::inverse(&planes);
        round = round.max(px.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let e_px: f64 = px.iter().map(|v| v * v).sum();
        let e_co: f64 = planes.coefficients().map(|v| v * v).sum();
        energy = energy.max((e_px - e_co).abs() / e_px);
    }
    outcome(
        round < 1e-12 && energy < 1e-9,
        format!("100 images: max round-trip error {round:.1e} (limit 1e-12), max Parseval mismatch {energy:.1e} (limit 1e-9)"),
    )
}

fn c5_gradient_check() -> Outcome {
    let mut r = rng(0xC5);
    let mut worst: f64 = 0.0;
    for arch in 0..20u64 {
        let depth = r.random_range(1..4);
        let mut sizes = vec![r.random_range(1..6)];
        for _ in 0..depth {
            sizes.push(r.random_range(2..8));
        }
        sizes.push(r.random_range(1..5));
        let head = if arch % 2 == 0 { Head::Linear } else { Head::Softmax };
        let mut net = Mlp::new(&sizes, head, arch).unwrap();
        let x: Vec<f64> = (0..sizes[0]).map(|_| r.random_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| r.random_range(-1.0..1.0)).collect();
        let loss = |n: &Mlp| n.forward(&x).unwrap().iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        let analytic = mlp_backward(&net, &x, &c).unwrap().flatten();
        let h = 1e-6;
        for (i, a) in analytic.iter().enumerate() {
            let orig = *net.params_mut().nth(i).unwrap();
            *net.params_mut().nth(i).unwrap() = orig + h;
            let up = loss(&net);
            *net.params_mut().nth(i).unwrap() = orig - h;
            let down = loss(&net);
            *net.params_mut().nth(i).unwrap() = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max((numeric - a).abs() / numeric.abs().max(a.abs()).max(1e-6));
        }
    }
    outcome(
        worst < 1e-4,
        format!("20 architectures, max relative error {worst:.2e} (limit 1e-4, denominator floor 1e-6)"),
    )
}

fn bandit_probability(hp: &TrainHp) -> f64 {
    let mut env = Bandit::new(vec![0.0, 1.0]);
    let (m, _) = a2c_train(&mut env, hp).unwrap();
    m.actor.forward(&m.input(&env.state)).unwrap()[1]
}

fn c6_bandit() -> Outcome {
    let adam = |seed| TrainHp {
        episodes: 300,
        reward_scale: 1.0,
        seed,
        ..TrainHp::desk()
    };
    let probs: Vec<f64> = (0..10).map(|s| bandit_probability(&adam(s))).collect();
    let good = probs.iter().filter(|p| **p > 0.9).count();
    let sgd: Vec<f64> = (0..10)
        .map(|s| {
            bandit_probability(&TrainHp {
                episodes: 300,
                optimizer: OptimizerKind::Sgd,
                seed: s,
                ..TrainHp::default()
            })
        })
        .collect();
    let sgd_good = sgd.iter().filter(|p| **p > 0.9).count();
    outcome(
        good >= 9,
        format!(
            "Adam lr 1e-4: {good}/10 seeds with P(good) > 0.9 after 300 episodes (need >= 9); \
             plain SGD lr 1e-4 for reference: {sgd_good}/10"
        ),
    )
}

struct Scripted(RefCell<Vec<f64>>);

impl DistanceEstimator for Scripted {
    fn distance(&self, _batch: &SampleSet) -> shiftguard_core::Result<f64> {
        Ok(self.0.borrow_mut().remove(0))
    }
}

struct First;

impl Policy for First {
    fn action_count(&self) -> usize {
        8
    }

    fn select(&self, _state: &StateVector) -> shiftguard_core::Result<usize> {
        Ok(0)
    }
}

struct Blocked;

impl OperabilityGate for Blocked {
    fn assess(&self, _batch: &SampleSet) -> shiftguard_core::Result<GateDecision> {
        Ok(GateDecision {
            inoperable: true,
            fraction: 1.0,
        })
    }
}

fn trace(ws: &[f64], literal: bool, gate: &dyn OperabilityGate) -> RecoveryReport {
    let batch = SampleSet::unlabeled(vec![Image::filled(8, 8, 1, 0.5).unwrap()]).unwrap();
    let cfg = ControllerConfig {
        literal,
        ..ControllerConfig::default()
    };
    let est = Scripted(RefCell::new(ws.to_vec()));
    run_selection(&batch, &est, &First, gate, &action_library(), &cfg, 0)
        .unwrap()
        .report
}

fn c7_controller_traces() -> Outcome {
    let first = action_library()[0].clone();
    let cases = [
        ("harm", trace(&[10.0, 9.5, 9.6], false, &AlwaysOperable), StopReason::Harm, vec![first.clone()]),
        ("success-default", trace(&[10.0, 8.9], false, &AlwaysOperable), StopReason::Success, vec![first.clone()]),
        ("success-literal", trace(&[10.0, 8.9], true, &AlwaysOperable), StopReason::Success, vec![]),
        (
            "horizon",
            trace(&[10.0, 9.9, 9.8, 9.7, 9.6, 9.5], false, &AlwaysOperable),
            StopReason::Horizon,
            vec![first.clone(); 5],
        ),
        ("inoperable", trace(&[10.0], false, &Blocked), StopReason::Inoperable, vec![]),
    ];
    let mut bad = Vec::new();
    for (name, report, stop, seq) in &cases {
        if report.stop != *stop || report.sequence.steps() != seq.as_slice() {
            bad.push(*name);
        }
    }
    outcome(
        bad.is_empty(),
        format!("{}/5 scripted scenarios match{}", 5 - bad.len(), if bad.is_empty() { String::new() } else { format!(" (mismatch: {bad:?})") }),
    )
}

fn c8_operability() -> Outcome {
    let mut aurocs = Vec::new();
    let (mut noise_ok, mut median_ok, mut both, mut single_class) = (0, 0, 0, 0);
    for seed in 0..10u64 {
        let all = synth_dataset(2000, 28, 4, seed).unwrap();
        let clf = Classifier::train(
            &all.slice(0, 1000),
            4,
            &shiftguard_core::learn::ClassifierHp {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        let val = all.slice(1000, 1500);
        let est = Estimator::new(&val, EstimatorConfig::default()).unwrap();
        let ladders: Vec<_> = SurrogateFamily::ALL.iter().map(|f| (*f, f.ladder())).collect();
        let labels = generate_labels(&val, &ladders, &clf, &est, -0.3, mix(seed, 1)).unwrap();
        // With a single label class no gate can be fitted; score it at chance.
        match train_operability(&labels.rows, TreeParams::default(), 0.3, mix(seed, 2)) {
            Ok(gate) => aurocs.push(gate.auroc),
            Err(shiftguard_core::Error::SingleClass) => {
                single_class += 1;
                aurocs.push(0.5);
            }
            Err(e) => panic!("gate training failed: {e}"),
        }
        let n = labels.label_of(SurrogateFamily::UniformNoise) == Some(true);
        let m = labels.label_of(SurrogateFamily::MedianBlur) == Some(false);
        noise_ok += usize::from(n);
        median_ok += usize::from(m);
        both += usize::from(n && m);
    }
    let mean = aurocs.iter().sum::<f64>() / aurocs.len() as f64;
    let min = aurocs.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        mean >= 0.70 && both >= 8,
        format!(
            "mean held-out AUROC {mean:.3} (min {min:.3}, need mean >= 0.70; {single_class} single-class seeds scored 0.5); \
             uniform noise operable {noise_ok}/10, \
             median blur inoperable {median_ok}/10, both {both}/10 (need >= 8)"
        ),
    )
}

struct EndToEnd {
    outcome: Outcome,
    classifier: Classifier,
    data: pipeline::Dataset,
}

fn c9_end_to_end(out: &std::path::Path) -> EndToEnd {
    let mut cfg = RunConfig::default();
    cfg.set("out", &out.to_string_lossy()).unwrap();
    let (classifier, summary) = pipeline::cmd_train_classifier(&cfg).unwrap();
    pipeline::cmd_train_operability(&cfg).unwrap();
    let start = Instant::now();
    pipeline::cmd_train_policy(&cfg).unwrap();
    let train_time = start.elapsed();
    let data = pipeline::load_dataset(&cfg).unwrap();
    let gate = pipeline::load_gate(&cfg).unwrap();
    let (model, actions) = pipeline::load_policy(&cfg).unwrap();
    let outcomes = pipeline::evaluate(&cfg, &data, &classifier, &model, &actions, &gate).unwrap();
    let table = pipeline::accuracy_table(&outcomes);
    let identity_exact = outcomes
        .iter()
        .filter(|o| o.shift == "identity")
        .all(|o| o.acc_recovered == o.acc_shifted && o.acc_shifted == o.acc_clean);
    let cells: Vec<_> = table.iter().filter(|r| r.shift != "identity").collect();
    let worse: Vec<String> = cells
        .iter()
        .filter(|r| r.acc_recovered < r.acc_shifted)
        .map(|r| format!("{}:{} ({:+.4})", r.shift, r.severity, r.delta))
        .collect();
    let mean_delta = cells.iter().map(|r| r.delta).sum::<f64>() / cells.len() as f64;
    for r in &table {
        println!(
            "    {:<14} {} clean {:.4} shifted {:.4} recovered {:.4} delta {:+.4}",
            r.shift, r.severity, r.acc_clean, r.acc_shifted, r.acc_recovered, r.delta
        );
    }
    let pass = summary.test_accuracy >= 0.90
        && train_time <= Duration::from_secs(15 * 60)
        && worse.is_empty()
        && mean_delta > 0.0
        && identity_exact
        && cells.len() == 6;
    EndToEnd {
        outcome: outcome(
            pass,
            format!(
                "clean accuracy {:.4} (need >= 0.90); policy 500 episodes in {:.0}s (limit 900s); \
                 {} of {} cells with recovered < shifted{}; mean delta {mean_delta:+.4} (need > 0); \
                 identity delta exactly 0: {identity_exact}",
                summary.test_accuracy,
                train_time.as_secs_f64(),
                worse.len(),
                cells.len(),
                if worse.is_empty() { String::new() } else { format!(" [{}]", worse.join(", ")) },
            ),
        ),
        classifier,
        data,
    }
}

fn c10_error_vs_tv(classifier: &Classifier, data: &pipeline::Dataset) -> Outcome {
    let est = Estimator::new(&data.val, EstimatorConfig::default()).unwrap();
    let reference = est.embed(&data.val).unwrap();
    let (mut errors, mut tvs) = (Vec::new(), Vec::new());
    for (i, (_, spec)) in surrogate_cells("paper-imagenet").unwrap().iter().enumerate() {
        let shifted = apply(spec, &data.test, mix(0xC10, i as u64)).unwrap();
        errors.push(1.0 - classifier.accuracy(&shifted).unwrap());
        let cloud = est.embed(&shifted).unwrap();
        tvs.push(sliced_divergence(&reference, &cloud, Divergence::TotalVariation, 32, 64, 1).unwrap());
    }
    let r = pearson(&errors, &tvs).unwrap();
    outcome(r > 0.3, format!("Pearson(error, histogram TV) over 30 cells = {r:.3} (need > 0.3)"))
}

fn c11_projection_bench(out: &std::path::Path, data: &pipeline::Dataset) -> Outcome {
    let mut cfg = RunConfig::default();
    cfg.set("out", &out.to_string_lossy()).unwrap();
    let rows = pipeline::project_bench(&cfg, data).unwrap();
    let largest = rows.iter().map(|r| r.sample_size).max().unwrap();
    let mean = |family: &str, shift: &str| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r: &&BenchRow| {
                r.family == family && r.shift == shift && r.sample_size == largest && r.severity == 5
            })
            .map(|r| r.distance)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let mut wins = 0;
    let mut parts = Vec::new();
    for (shift, _) in pipeline::bench_shifts() {
        let (o, g, s) = (mean("orthonormal", shift), mean("gaussian", shift), mean("sparse", shift));
        wins += usize::from(o >= g && o >= s);
        parts.push(format!("{shift}: orthonormal {o:.2} gaussian {g:.2} sparse {s:.2}"));
    }
    outcome(
        wins >= 2,
        format!(
            "n = {largest}, severity 5: orthonormal largest in {wins}/3 shift types (need >= 2) [{}]",
            parts.join("; ")
        ),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |id: u32, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_FAILURES.contains(&id) { " (known failure)" } else { "" };
        println!("criterion {id:>2}: {tag}{note}: {}", o.detail);
        results.push((id, o));
    };
    report(1, c1_projection_contraction());
    report(2, c2_hungarian_oracle());
    report(3, c3_sliced_vs_exact());
    report(4, c4_haar());
    report(5, c5_gradient_check());
    report(6, c6_bandit());
    report(7, c7_controller_traces());
    report(8, c8_operability());
    let e2e = c9_end_to_end(dir.path());
    report(9, e2e.outcome);
    report(10, c10_error_vs_tv(&e2e.classifier, &e2e.data));
    report(11, c11_projection_bench(dir.path(), &e2e.data));

    let unexpected: Vec<u32> = results
        .iter()
        .filter(|(id, o)| o.pass == KNOWN_FAILURES.contains(id))
        .map(|(id, _)| *id)
        .collect();
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected results for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
