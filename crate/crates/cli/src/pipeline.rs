//! Commands as library functions: each reads a resolved [`RunConfig`],
//! writes its artifacts under the output directory and returns a summary.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;
use shiftguard_core::controller::{run_selection, ControllerConfig, RecoveryReport, Selection, StopReason};
use shiftguard_core::features::batch_state;
use shiftguard_core::learn::{
    a2c_train, elbow, ActorCritic, Classifier, ClassifierHp, OptimizerKind, Policy, TrainHp, TrainLog,
    TreeParams,
};
use shiftguard_core::mdp::{calibrate_severities, EnvConfig, RecoveryEnv};
use shiftguard_core::metrics::{
    flatten, make_projection, wasserstein_exact, Estimator, EstimatorConfig, ProjectionFamily,
};
use shiftguard_core::operability::{generate_labels, train_operability, LabeledSet, TreeGate};
use shiftguard_core::rng::{mix, rng};
use shiftguard_core::synth::synth_dataset;
use shiftguard_core::transforms::{apply, surrogate_cells, SurrogateFamily};
use shiftguard_core::{SampleSet, StateVector, TransformSpec};

use crate::config::RunConfig;
use crate::formats::{load_idx, save_raster};
use crate::io::{write_atomic, write_csv};
use crate::persist::Model;

pub const CLASSIFIER_FILE: &str = "classifier.json";
pub const GATE_FILE: &str = "gate.json";
pub const POLICY_FILE: &str = "policy.json";

// Stream tags for seeds derived from the run seed.
const LABEL_STREAM: u64 = 0x1AB;
const GATE_STREAM: u64 = 0x6A7E;
const BATCH_STREAM: u64 = 0xBA7;
const SHIFT_STREAM: u64 = 0x5F7;
const BENCH_STREAM: u64 = 0xBE4C;
const CLUSTER_STREAM: u64 = 0xC1;

/// The three disjoint splits of the loaded dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Trains the evaluation classifier.
    pub train: SampleSet,
    /// The clean validation set every distance is measured against.
    pub val: SampleSet,
    /// Pool the shifted test batches are drawn from.
    pub test: SampleSet,
    pub classes: usize,
}

pub fn load_dataset(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let spec = cfg.str("data");
    let all = if spec == "synth" {
        synth_dataset(
            cfg.get("synth_n")?,
            cfg.get("synth_side")?,
            cfg.get("synth_classes")?,
            cfg.get("synth_seed")?,
        )?
    } else if let Some(paths) = spec.strip_prefix("idx:") {
        let (images, labels) = paths
            .split_once(',')
            .ok_or_else(|| anyhow!("idx data needs `idx:IMAGES,LABELS`"))?;
        load_idx(Path::new(images), Path::new(labels)).with_context(|| format!("loading {spec}"))?
    } else {
        bail!("unknown data source `{spec}`");
    };
    let labels = all.labels().ok_or_else(|| anyhow!("dataset has no labels"))?;
    let classes = labels.iter().max().map_or(0, |m| *m as usize + 1);
    let n = all.len();
    let a = (n as f64 * cfg.get::<f64>("split_train")?).round() as usize;
    let b = a + (n as f64 * cfg.get::<f64>("split_val")?).round() as usize;
    if a == 0 || b <= a || b >= n {
        bail!("splits leave an empty train, validation or test set ({n} images)");
    }
    Ok(Dataset {
        train: all.slice(0, a),
        val: all.slice(a, b),
        test: all.slice(b, n),
        classes,
    })
}

/// `size` images drawn without replacement, in pool order. The whole pool
/// when it is not larger than `size`.
pub fn sample_batch(pool: &SampleSet, size: usize, seed: u64) -> SampleSet {
    if size >= pool.len() {
        return pool.clone();
    }
    let mut idx = sample(&mut rng(seed), pool.len(), size).into_vec();
    idx.sort_unstable();
    pool.select(&idx)
}

fn parse_family(name: &str) -> anyhow::Result<SurrogateFamily> {
    SurrogateFamily::from_name(name).ok_or_else(|| anyhow!("unknown surrogate family `{name}`"))
}

pub fn estimator_config(cfg: &RunConfig, key: &str) -> anyhow::Result<EstimatorConfig> {
    let exact = match cfg.str(key) {
        "exact" => true,
        "sliced" => false,
        other => bail!("config key `{key}`: expected exact or sliced, found `{other}`"),
    };
    let family = cfg.str("projection");
    Ok(EstimatorConfig {
        dim: cfg.get("proj_dim")?,
        slices: cfg.get("slices")?,
        p: cfg.get("p")?,
        seed: cfg.get("estimator_seed")?,
        family: ProjectionFamily::from_name(family).ok_or_else(|| anyhow!("unknown projection `{family}`"))?,
        intensity_scale: cfg.get("intensity_scale")?,
        exact,
    })
}

pub fn env_config(cfg: &RunConfig) -> anyhow::Result<EnvConfig> {
    let env = EnvConfig {
        lambda: cfg.get("lambda")?,
        omega: cfg.get("omega")?,
        gamma: cfg.get("gamma")?,
        horizon: cfg.get("horizon")?,
        estimator: estimator_config(cfg, "reward_estimator")?,
        profile: cfg.str("profile").to_string(),
        training_families: cfg
            .list::<String>("training_families")?
            .iter()
            .map(|f| parse_family(f))
            .collect::<anyhow::Result<_>>()?,
        batch_size: cfg.get("batch_size")?,
    };
    env.validate()?;
    Ok(env)
}

pub fn train_hp(cfg: &RunConfig) -> anyhow::Result<TrainHp> {
    let hp = TrainHp {
        learning_rate: cfg.get("learning_rate")?,
        gamma: cfg.get("gamma")?,
        episodes: cfg.get("episodes")?,
        epsilon_base: cfg.get("epsilon_base")?,
        epsilon_rate: cfg.get("epsilon_rate")?,
        epsilon_floor: cfg.get("epsilon_floor")?,
        hidden: cfg.list("hidden")?,
        optimizer: cfg.get::<OptimizerKind>("optimizer")?,
        grad_clip: cfg.optional("grad_clip")?,
        reward_scale: cfg.get("reward_scale")?,
        normalize_inputs: cfg.bool("normalize_inputs")?,
        seed: cfg.get("seed")?,
    };
    hp.validate()?;
    Ok(hp)
}

pub fn controller_config(cfg: &RunConfig) -> anyhow::Result<ControllerConfig> {
    let c = ControllerConfig {
        alpha: cfg.get("alpha")?,
        beta: cfg.get("beta")?,
        horizon: cfg.get("horizon")?,
        literal: cfg.bool("literal")?,
        estimator: estimator_config(cfg, "estimator")?,
    };
    c.validate()?;
    Ok(c)
}

pub fn classifier_hp(cfg: &RunConfig) -> anyhow::Result<ClassifierHp> {
    Ok(ClassifierHp {
        hidden: cfg.list("classifier_hidden")?,
        epochs: cfg.get("classifier_epochs")?,
        learning_rate: cfg.get("classifier_lr")?,
        batch_size: cfg.get("classifier_batch")?,
        seed: cfg.get("seed")?,
    })
}

fn save_config(cfg: &RunConfig, command: &str) -> anyhow::Result<()> {
    let path = cfg.out_dir().join(format!("{command}.config"));
    write_atomic(&path, cfg.render().as_bytes())?;
    Ok(())
}

fn model_path(cfg: &RunConfig, file: &str) -> PathBuf {
    cfg.models_dir().join(file)
}

pub fn load_classifier(cfg: &RunConfig) -> anyhow::Result<Classifier> {
    Ok(Classifier::from_net(Model::load(&model_path(cfg, CLASSIFIER_FILE))?.into_mlp()?)?)
}

pub fn load_gate(cfg: &RunConfig) -> anyhow::Result<TreeGate> {
    let (tree, threshold) = Model::load(&model_path(cfg, GATE_FILE))?.into_tree()?;
    Ok(TreeGate { tree, threshold })
}

pub fn load_policy(cfg: &RunConfig) -> anyhow::Result<(ActorCritic, Vec<TransformSpec>)> {
    Model::load(&model_path(cfg, POLICY_FILE))?.into_policy()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSummary {
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Serialize)]
struct AccuracyRow<'a> {
    split: &'a str,
    accuracy: f64,
}

pub fn cmd_train_classifier(cfg: &RunConfig) -> anyhow::Result<(Classifier, ClassifierSummary)> {
    let data = load_dataset(cfg)?;
    let clf = Classifier::train(&data.train, data.classes, &classifier_hp(cfg)?)?;
    let summary = ClassifierSummary {
        train_accuracy: clf.accuracy(&data.train)?,
        val_accuracy: clf.accuracy(&data.val)?,
        test_accuracy: clf.accuracy(&data.test)?,
    };
    let out = cfg.out_dir();
    Model::Mlp(clf.net().clone()).save(&out.join(CLASSIFIER_FILE))?;
    write_csv(
        &out.join("classifier.csv"),
        &[
            AccuracyRow {
                split: "train",
                accuracy: summary.train_accuracy,
            },
            AccuracyRow {
                split: "validation",
                accuracy: summary.val_accuracy,
            },
            AccuracyRow {
                split: "test",
                accuracy: summary.test_accuracy,
            },
        ],
    )?;
    save_config(cfg, "train-classifier")?;
    Ok((clf, summary))
}

#[derive(Serialize)]
struct LabelRow {
    brightness: f64,
    std: f64,
    entropy: f64,
    family: &'static str,
    severity: u8,
    label: &'static str,
}

#[derive(Serialize)]
struct FamilyRow {
    family: &'static str,
    severity: u8,
    distance: f64,
    accuracy: f64,
    correlation: Option<f64>,
    operable: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct GateSummary {
    pub labels: LabeledSet,
    pub gate: TreeGate,
    pub auroc: f64,
}

/// Labels the six surrogate families on the validation set, fits the gate
/// and writes `gate.json`, `labels.csv` and `families.csv`.
pub fn cmd_train_operability(cfg: &RunConfig) -> anyhow::Result<GateSummary> {
    let data = load_dataset(cfg)?;
    let clf = load_classifier(cfg)?;
    let seed: u64 = cfg.get("seed")?;
    let est = Estimator::new(&data.val, estimator_config(cfg, "estimator")?)?;
    let ladders: Vec<_> = SurrogateFamily::ALL.iter().map(|f| (*f, f.ladder())).collect();
    let labels = generate_labels(&data.val, &ladders, &clf, &est, cfg.get("r_max")?, mix(seed, LABEL_STREAM))?;
    let params = TreeParams {
        max_depth: cfg.get("tree_depth")?,
        min_leaf: cfg.get("min_leaf")?,
    };
    let fitted = train_operability(&labels.rows, params, cfg.get("holdout")?, mix(seed, GATE_STREAM))?;
    let threshold: f64 = cfg.get("gate_threshold")?;
    let out = cfg.out_dir();
    Model::Tree {
        tree: fitted.tree.clone(),
        threshold,
        auroc: Some(fitted.auroc),
    }
    .save(&out.join(GATE_FILE))?;
    let rows: Vec<LabelRow> = labels
        .rows
        .iter()
        .map(|r| LabelRow {
            brightness: r.features.brightness,
            std: r.features.std,
            entropy: r.features.entropy,
            family: r.family.name(),
            severity: r.severity,
            label: if r.inoperable { "inoperable" } else { "operable" },
        })
        .collect();
    write_csv(&out.join("labels.csv"), &rows)?;
    let fams: Vec<FamilyRow> = labels
        .families
        .iter()
        .flat_map(|f| {
            f.distances.iter().zip(&f.accuracies).enumerate().map(|(i, (d, a))| FamilyRow {
                family: f.family.name(),
                severity: i as u8 + 1,
                distance: *d,
                accuracy: *a,
                correlation: f.correlation,
                operable: f.operable,
            })
        })
        .collect();
    write_csv(&out.join("families.csv"), &fams)?;
    save_config(cfg, "train-operability")?;
    Ok(GateSummary {
        labels,
        gate: TreeGate {
            tree: fitted.tree,
            threshold,
        },
        auroc: fitted.auroc,
    })
}

#[derive(Serialize)]
struct StepRow {
    episode: usize,
    step: usize,
    action: String,
    wasserstein: Option<f64>,
    ssim: Option<f64>,
    reward: f64,
}

#[derive(Serialize)]
struct EpisodeRow {
    episode: usize,
    epsilon: f64,
    terminal_reward: f64,
    total_reward: f64,
}

/// Moving-average window of the reported training metric.
pub const REPORT_WINDOW: usize = 50;

/// Trains the policy on the recovery environment over the validation set
/// and writes `policy.json`, `episodes.csv` and `policy_log.csv`.
pub fn cmd_train_policy(cfg: &RunConfig) -> anyhow::Result<(ActorCritic, TrainLog)> {
    let data = load_dataset(cfg)?;
    let hp = train_hp(cfg)?;
    let mut env = RecoveryEnv::new(env_config(cfg)?, data.val)?;
    let (model, log) = a2c_train(&mut env, &hp)?;
    let actions = env.actions().to_vec();
    let out = cfg.out_dir();
    Model::Policy {
        model: model.clone(),
        actions: actions.clone(),
    }
    .save(&out.join(POLICY_FILE))?;
    let steps: Vec<StepRow> = log
        .steps
        .iter()
        .map(|s| StepRow {
            episode: s.episode,
            step: s.step,
            action: actions[s.action].to_string(),
            wasserstein: s.wasserstein,
            ssim: s.ssim,
            reward: s.reward,
        })
        .collect();
    write_csv(&out.join("episodes.csv"), &steps)?;
    let episodes: Vec<EpisodeRow> = log
        .episodes
        .iter()
        .map(|e| EpisodeRow {
            episode: e.episode,
            epsilon: e.epsilon,
            terminal_reward: e.terminal_reward,
            total_reward: e.total_reward,
        })
        .collect();
    write_csv(&out.join("policy_log.csv"), &episodes)?;
    save_config(cfg, "train-policy")?;
    Ok((model, log))
}

#[derive(Serialize)]
struct CalibrationCsvRow {
    family: &'static str,
    index: usize,
    severity: usize,
    relative_change: f64,
    in_range: bool,
    monotone: bool,
}

/// Relative state changes per surrogate severity on the validation set.
/// Returns the families whose severity-5 change falls outside the target
/// range.
pub fn cmd_calibrate(cfg: &RunConfig) -> anyhow::Result<Vec<&'static str>> {
    let data = load_dataset(cfg)?;
    let rows = calibrate_severities(cfg.str("profile"), &data.val, cfg.get("seed")?)?;
    let csv: Vec<CalibrationCsvRow> = rows
        .iter()
        .flat_map(|r| {
            r.relative_change.iter().enumerate().map(|(i, c)| CalibrationCsvRow {
                family: r.family.name(),
                index: r.index,
                severity: i + 1,
                relative_change: *c,
                in_range: r.in_range,
                monotone: r.monotone,
            })
        })
        .collect();
    write_csv(&cfg.out_dir().join("calibration.csv"), &csv)?;
    save_config(cfg, "calibrate")?;
    Ok(rows.iter().filter(|r| !r.in_range).map(|r| r.family.name()).collect())
}

/// The JSON form of a recovery report.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ReportDoc {
    pub w: Vec<f64>,
    pub sequence: Vec<String>,
    pub stop: String,
    pub inoperable_frac: Vec<f64>,
}

impl From<&RecoveryReport> for ReportDoc {
    fn from(r: &RecoveryReport) -> Self {
        Self {
            w: r.distances.clone(),
            sequence: r.sequence.steps().iter().map(|s| s.to_string()).collect(),
            stop: r.stop.to_string(),
            inoperable_frac: r.inoperable_fractions.clone(),
        }
    }
}

/// Always picks the single action it was built with.
struct Fixed;

impl Policy for Fixed {
    fn action_count(&self) -> usize {
        1
    }

    fn select(&self, _state: &StateVector) -> shiftguard_core::Result<usize> {
        Ok(0)
    }
}

/// Seeds of one shifted batch: which images, and the corruption noise.
fn batch_seeds(seed: u64, cell: u64, trial: u64) -> (u64, u64) {
    let base = mix(mix(seed, cell), trial);
    (mix(base, BATCH_STREAM), mix(base, SHIFT_STREAM))
}

/// Runs selection on one shifted test batch.
pub fn recover_batch(
    cfg: &RunConfig,
    data: &Dataset,
    est: &Estimator,
    policy: &(dyn Policy + Sync),
    actions: &[TransformSpec],
    gate: &TreeGate,
    shift: &TransformSpec,
    cell: u64,
    trial: u64,
) -> anyhow::Result<(SampleSet, SampleSet, Selection)> {
    let seed: u64 = cfg.get("seed")?;
    let (batch_seed, shift_seed) = batch_seeds(seed, cell, trial);
    let clean = sample_batch(&data.test, cfg.get("batch_size")?, batch_seed);
    let shifted = apply(shift, &clean, shift_seed)?;
    let sel = run_selection(&shifted, est, policy, gate, actions, &controller_config(cfg)?, trial)?;
    Ok((clean, shifted, sel))
}

/// Shifts a test batch, selects transforms and writes `report.json` plus
/// the recovered images under `recovered/`.
pub fn cmd_recover(cfg: &RunConfig) -> anyhow::Result<ReportDoc> {
    let data = load_dataset(cfg)?;
    let gate = load_gate(cfg)?;
    let shift = TransformSpec::parse(cfg.str("shift")).context("parsing --shift")?;
    let est = Estimator::new(&data.val, estimator_config(cfg, "estimator")?)?;
    let (_, _, sel) = match cfg.str("action") {
        "" => {
            let (model, actions) = load_policy(cfg)?;
            recover_batch(cfg, &data, &est, &model, &actions, &gate, &shift, 0, 0)?
        }
        a => {
            let action = TransformSpec::parse(a).context("parsing --action")?;
            let mut one = cfg.clone();
            one.set("horizon", "1")?;
            recover_batch(&one, &data, &est, &Fixed, &[action], &gate, &shift, 0, 0)?
        }
    };
    let doc = ReportDoc::from(&sel.report);
    let out = cfg.out_dir();
    let json = serde_json::to_string_pretty(&doc)? + "\n";
    write_atomic(&out.join("report.json"), json.as_bytes())?;
    let dir = out.join("recovered");
    for (i, img) in sel.recovered.images().iter().enumerate() {
        let ext = if img.channels() == 1 { "pgm" } else { "ppm" };
        save_raster(&dir.join(format!("{i:04}.{ext}")), img)?;
    }
    save_config(cfg, "recover")?;
    Ok(doc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyTableRow {
    pub shift: String,
    pub severity: u8,
    pub acc_clean: f64,
    pub acc_shifted: f64,
    pub acc_recovered: f64,
    pub delta: f64,
}

/// One (shift, severity, trial) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub shift: String,
    pub severity: u8,
    pub trial: u64,
    pub acc_clean: f64,
    pub acc_shifted: f64,
    pub acc_recovered: f64,
    pub stop: StopReason,
    pub sequence: Vec<String>,
}

/// Evaluation cells: `(label, severity, spec)`. Identity has severity 0.
pub fn eval_cells(cfg: &RunConfig) -> anyhow::Result<Vec<(String, u8, TransformSpec)>> {
    let severities: Vec<u8> = cfg.list("eval_severities")?;
    let mut cells = Vec::new();
    for name in cfg.list::<String>("eval_shifts")? {
        if name == "identity" {
            cells.push((name, 0, TransformSpec::identity()));
            continue;
        }
        let family = parse_family(&name)?;
        for &s in &severities {
            cells.push((name.clone(), s, family.spec(s)?));
        }
    }
    Ok(cells)
}

/// Accuracy of the evaluation classifier on clean, shifted and recovered
/// batches for every cell and trial.
pub fn evaluate(
    cfg: &RunConfig,
    data: &Dataset,
    clf: &Classifier,
    policy: &(dyn Policy + Sync),
    actions: &[TransformSpec],
    gate: &TreeGate,
) -> anyhow::Result<Vec<TrialOutcome>> {
    let est = Estimator::new(&data.val, estimator_config(cfg, "estimator")?)?;
    let trials: u64 = cfg.get("trials")?;
    let jobs: Vec<_> = eval_cells(cfg)?
        .into_iter()
        .enumerate()
        .flat_map(|(ci, cell)| (0..trials).map(move |t| (ci as u64, cell.clone(), t)))
        .collect();
    jobs.into_par_iter()
        .map(|(ci, (shift, severity, spec), trial)| {
            let (clean, shifted, sel) = recover_batch(cfg, data, &est, policy, actions, gate, &spec, ci, trial)?;
            Ok(TrialOutcome {
                shift,
                severity,
                trial,
                acc_clean: clf.accuracy(&clean)?,
                acc_shifted: clf.accuracy(&shifted)?,
                acc_recovered: clf.accuracy(&sel.recovered)?,
                stop: sel.report.stop,
                sequence: sel.report.sequence.steps().iter().map(|s| s.to_string()).collect(),
            })
        })
        .collect()
}

/// Averages trial outcomes per (shift, severity), in first-seen order.
pub fn accuracy_table(outcomes: &[TrialOutcome]) -> Vec<AccuracyTableRow> {
    let mut rows: Vec<(AccuracyTableRow, usize)> = Vec::new();
    for o in outcomes {
        let i = match rows.iter().position(|(r, _)| r.shift == o.shift && r.severity == o.severity) {
            Some(i) => i,
            None => {
                rows.push((
                    AccuracyTableRow {
                        shift: o.shift.clone(),
                        severity: o.severity,
                        acc_clean: 0.0,
                        acc_shifted: 0.0,
                        acc_recovered: 0.0,
                        delta: 0.0,
                    },
                    0,
                ));
                rows.len() - 1
            }
        };
        let (r, n) = &mut rows[i];
        r.acc_clean += o.acc_clean;
        r.acc_shifted += o.acc_shifted;
        r.acc_recovered += o.acc_recovered;
        *n += 1;
    }
    rows.into_iter()
        .map(|(mut r, n)| {
            let n = n as f64;
            r.acc_clean /= n;
            r.acc_shifted /= n;
            r.acc_recovered /= n;
            r.delta = r.acc_recovered - r.acc_shifted;
            r
        })
        .collect()
}

/// Writes `accuracy.csv`, `project_bench.csv` and `cluster.csv`.
pub fn cmd_eval(cfg: &RunConfig) -> anyhow::Result<Vec<AccuracyTableRow>> {
    let data = load_dataset(cfg)?;
    let clf = load_classifier(cfg)?;
    let gate = load_gate(cfg)?;
    let (model, actions) = load_policy(cfg)?;
    let outcomes = evaluate(cfg, &data, &clf, &model, &actions, &gate)?;
    let table = accuracy_table(&outcomes);
    write_csv(&cfg.out_dir().join("accuracy.csv"), &table)?;
    bench_to_csv(cfg, &data)?;
    cluster_to_csv(cfg, &data)?;
    save_config(cfg, "eval")?;
    Ok(table)
}

/// Shift types of the projection benchmark and their severity ladders.
pub fn bench_shifts() -> Vec<(&'static str, Vec<TransformSpec>)> {
    let ladder = |name: &str, param: &str, values: [f64; 5]| -> Vec<TransformSpec> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                TransformSpec::new(name, &[(param, *v)])
                    .expect("benchmark specs are valid")
                    .with_severity(i as u8 + 1)
            })
            .collect()
    };
    vec![
        ("gaussian_noise", ladder("gaussian_noise", "sigma", [0.05, 0.1, 0.15, 0.2, 0.3])),
        ("impulse_noise", ladder("impulse_noise", "amount", [0.02, 0.05, 0.1, 0.15, 0.2])),
        ("gaussian_blur", ladder("gaussian_blur", "sigma", [0.5, 0.75, 1.0, 1.25, 1.5])),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: &'static str,
    pub shift: &'static str,
    pub sample_size: usize,
    pub severity: u8,
    pub trial: u64,
    pub distance: f64,
}

/// Exact Wasserstein distance between a clean validation sample and a
/// shifted test sample after each projection family, on unit-scale pixels.
pub fn project_bench(cfg: &RunConfig, data: &Dataset) -> anyhow::Result<Vec<BenchRow>> {
    let seed = mix(cfg.get("seed")?, BENCH_STREAM);
    let dim: usize = cfg.get("bench_dim")?;
    let p: u32 = cfg.get("p")?;
    let sizes: Vec<usize> = cfg.list("bench_sizes")?;
    let trials: u64 = cfg.get("bench_trials")?;
    let (w, h, _) = data.val.shape().ok_or_else(|| anyhow!("empty validation set"))?;
    let families = [
        ProjectionFamily::Orthonormal,
        ProjectionFamily::Gaussian,
        ProjectionFamily::Sparse,
    ];
    let shifts = bench_shifts();
    let mut jobs = Vec::new();
    for &n in &sizes {
        for trial in 0..trials {
            for (si, (shift, ladder)) in shifts.iter().enumerate() {
                for spec in ladder {
                    jobs.push((n, trial, si, *shift, spec.clone()));
                }
            }
        }
    }
    let rows: Vec<Vec<BenchRow>> = jobs
        .into_par_iter()
        .map(|(n, trial, si, shift, spec)| {
            let t = mix(mix(seed, n as u64), trial);
            let clean = sample_batch(&data.val, n, mix(t, 1));
            let other = sample_batch(&data.test, n, mix(t, 2));
            let shifted = apply(&spec, &other, mix(mix(t, 3), si as u64))?;
            let a = flatten(&clean, 1.0)?;
            let b = flatten(&shifted, 1.0)?;
            let severity = spec.severity().unwrap_or(0);
            families
                .iter()
                .map(|&family| {
                    let proj = make_projection(w * h, dim, family, mix(t, 4))?;
                    let d = wasserstein_exact(&proj.project_cloud(&a)?, &proj.project_cloud(&b)?, p)?;
                    Ok(BenchRow {
                        family: family.name(),
                        shift,
                        sample_size: a.len().min(b.len()),
                        severity,
                        trial,
                        distance: d,
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn bench_to_csv(cfg: &RunConfig, data: &Dataset) -> anyhow::Result<Vec<BenchRow>> {
    let rows = project_bench(cfg, data)?;
    write_csv(&cfg.out_dir().join("project_bench.csv"), &rows)?;
    Ok(rows)
}

pub fn cmd_project_bench(cfg: &RunConfig) -> anyhow::Result<Vec<BenchRow>> {
    let data = load_dataset(cfg)?;
    let rows = bench_to_csv(cfg, &data)?;
    save_config(cfg, "project-bench")?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRow {
    pub shift: String,
    pub brightness: f64,
    pub std: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub k: usize,
    pub inertia: f64,
}

/// Batch states of sampled test sub-batches under every surrogate cell and
/// the clean data, and the k-means inertia for k = 1..=cluster_k.
pub fn cluster_states(cfg: &RunConfig, data: &Dataset) -> anyhow::Result<(Vec<StateRow>, Vec<ClusterRow>)> {
    let seed = mix(cfg.get("seed")?, CLUSTER_STREAM);
    let batch: usize = cfg.get("batch_size")?;
    let samples: u64 = cfg.get("cluster_samples")?;
    let mut cells = vec![("identity".to_string(), TransformSpec::identity())];
    cells.extend(
        surrogate_cells(cfg.str("profile"))?
            .into_iter()
            .map(|(f, s)| (format!("{}:{}", f.name(), s.severity().unwrap_or(0)), s)),
    );
    let jobs: Vec<_> = cells
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| (0..samples).map(move |j| (ci, c, j)))
        .collect();
    let states: Vec<StateRow> = jobs
        .into_par_iter()
        .map(|(ci, (name, spec), j)| {
            let s = mix(mix(seed, ci as u64), j);
            let b = apply(spec, &sample_batch(&data.test, batch, mix(s, 1)), mix(s, 2))?;
            let v = batch_state(&b)?;
            Ok(StateRow {
                shift: name.clone(),
                brightness: v.brightness,
                std: v.std,
                entropy: v.entropy,
            })
        })
        .collect::<anyhow::Result<_>>()?;
    let points: Vec<[f64; 3]> = states.iter().map(|s| [s.brightness, s.std, s.entropy]).collect();
    let inertia = elbow(&points, cfg.get("cluster_k")?, seed)?;
    let curve = inertia
        .into_iter()
        .enumerate()
        .map(|(i, inertia)| ClusterRow { k: i + 1, inertia })
        .collect();
    Ok((states, curve))
}

fn cluster_to_csv(cfg: &RunConfig, data: &Dataset) -> anyhow::Result<Vec<ClusterRow>> {
    let (states, curve) = cluster_states(cfg, data)?;
    write_csv(&cfg.out_dir().join("states.csv"), &states)?;
    write_csv(&cfg.out_dir().join("cluster.csv"), &curve)?;
    Ok(curve)
}

pub fn cmd_cluster(cfg: &RunConfig) -> anyhow::Result<Vec<ClusterRow>> {
    let data = load_dataset(cfg)?;
    let curve = cluster_to_csv(cfg, &data)?;
    save_config(cfg, "cluster")?;
    Ok(curve)
}

