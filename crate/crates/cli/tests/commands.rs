use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shiftguard::pipeline::{ReportDoc, POLICY_FILE};

/// A configuration small enough for every command to finish in seconds.
const SMALL: &str = "\
synth_n = 400
batch_size = 64
episodes = 12
hidden = 16,16
proj_dim = 16
classifier_epochs = 4
bench_sizes = 16,32
bench_trials = 1
cluster_samples = 2
trials = 1
";

fn shiftguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftguard"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = shiftguard(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn setup(dir: &Path) -> String {
    let config = dir.join("small.config");
    fs::write(&config, SMALL).unwrap();
    config.to_string_lossy().into_owned()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn full_pipeline_on_small_data() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let out = dir.path().join("run");
    let out_s = out.to_string_lossy().into_owned();
    let common = ["--config", config.as_str(), "--out", out_s.as_str()];
    let with = |cmd: &str, extra: &[&str]| {
        let mut args = vec![cmd];
        args.extend_from_slice(&common);
        args.extend_from_slice(extra);
        ok(&args)
    };

    assert!(with("train-classifier", &[]).contains("clean test accuracy"));
    assert!(with("train-operability", &[]).contains("held-out AUROC"));
    with("train-policy", &[]);
    with("calibrate", &[]);

    let (header, rows) = csv_rows(&out.join("policy_log.csv"));
    assert_eq!(header, ["episode", "epsilon", "terminal_reward", "total_reward"]);
    assert_eq!(rows.len(), 12);
    let (header, rows) = csv_rows(&out.join("episodes.csv"));
    assert_eq!(header, ["episode", "step", "action", "wasserstein", "ssim", "reward"]);
    assert_eq!(rows.len(), 12 * 5);
    let (header, _) = csv_rows(&out.join("labels.csv"));
    assert_eq!(header, ["brightness", "std", "entropy", "family", "severity", "label"]);

    // The resolved config reproduces the run.
    let resolved = fs::read_to_string(out.join("train-policy.config")).unwrap();
    assert!(resolved.contains("episodes = 12"));

    with("recover", &["--shift", "identity"]);
    let report: ReportDoc = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report.sequence.is_empty());
    assert!(["inoperable", "success", "harm", "horizon"].contains(&report.stop.as_str()));
    assert_eq!(fs::read_dir(out.join("recovered")).unwrap().count(), 64);

    with("recover", &["--shift", "uniform_noise(b=0.9)", "--action", "wavelet_bayes"]);
    let report: ReportDoc = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report.sequence.len() <= 1);
    assert!(report.w.len() <= 2);

    with("eval", &[]);
    let (header, rows) = csv_rows(&out.join("accuracy.csv"));
    assert_eq!(
        header,
        ["shift", "severity", "acc_clean", "acc_shifted", "acc_recovered", "delta"]
    );
    for r in &rows {
        let f: Vec<f64> = r[2..].iter().map(|v| v.parse().unwrap()).collect();
        assert!((f[3] - (f[2] - f[1])).abs() < 1e-12);
    }
    let identity = rows.iter().find(|r| r[0] == "identity").unwrap();
    assert_eq!(identity[2], identity[3]);
    assert_eq!(identity[5].parse::<f64>().unwrap(), 0.0);

    let (header, rows) = csv_rows(&out.join("project_bench.csv"));
    assert_eq!(header, ["family", "shift", "sample_size", "severity", "trial", "distance"]);
    for family in ["orthonormal", "gaussian", "sparse"] {
        assert!(rows.iter().any(|r| r[0] == family));
    }
    let (header, rows) = csv_rows(&out.join("cluster.csv"));
    assert_eq!(header, ["k", "inertia"]);
    assert_eq!(rows.len(), 10);
}

#[test]
fn policy_training_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = setup(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&[
            "train-policy",
            "--config",
            &config,
            "--out",
            &out.to_string_lossy(),
            "--seed",
            "5",
        ]);
    }
    assert_eq!(
        fs::read(a.join(POLICY_FILE)).unwrap(),
        fs::read(b.join(POLICY_FILE)).unwrap()
    );
}

#[test]
fn configuration_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.config");
    fs::write(&bad, "no_such_key = 1\n").unwrap();
    let out = shiftguard(&["calibrate", "--config", &bad.to_string_lossy()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key `no_such_key`"));

    let out = shiftguard(&["calibrate", "--set", "optimizer=rmsprop", "--out", &dir.path().to_string_lossy()]);
    assert!(out.status.success(), "calibrate does not read the optimizer");
    let out = shiftguard(&[
        "train-policy",
        "--set",
        "optimizer=rmsprop",
        "--out",
        &dir.path().to_string_lossy(),
    ]);
    assert!(!out.status.success());

    let out = shiftguard(&["recover", "--models", &dir.path().join("missing").to_string_lossy()]);
    assert!(!out.status.success());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.config");
    fs::write(&config, "seed = 3\nsynth_n = 200\n").unwrap();
    let out = dir.path().join("o");
    ok(&[
        "calibrate",
        "--config",
        &config.to_string_lossy(),
        "--seed",
        "8",
        "--out",
        &out.to_string_lossy(),
    ]);
    let resolved = fs::read_to_string(out.join("calibrate.config")).unwrap();
    assert!(resolved.contains("seed = 8\n"));
    assert!(resolved.contains("synth_n = 200\n"));
}
