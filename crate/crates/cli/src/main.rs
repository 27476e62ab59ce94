use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shiftguard::pipeline::{self, REPORT_WINDOW};
use shiftguard::RunConfig;

/// Distribution-shift detection and recovery for image classifiers.
#[derive(Parser)]
#[command(name = "shiftguard", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `synth` or `idx:IMAGES,LABELS`.
    #[arg(long, global = true)]
    data: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory with trained models (defaults to --out).
    #[arg(long, global = true)]
    models: Option<PathBuf>,
    /// Shift applied by `recover`, e.g. "uniform_noise(b=0.9)".
    #[arg(long, global = true)]
    shift: Option<String>,
    /// Fixed one-step action for `recover`, e.g. "clahe(tiles=2,limit=1)".
    #[arg(long, global = true)]
    action: Option<String>,
    /// Any config key, `key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the transform-selection policy.
    TrainPolicy(Global),
    /// Label surrogate shifts and train the operability gate.
    TrainOperability(Global),
    /// Train the evaluation classifier.
    TrainClassifier(Global),
    /// Report surrogate severity calibration.
    Calibrate(Global),
    /// Shift a test batch and recover it.
    Recover(Global),
    /// Accuracy table plus projection benchmark and clustering.
    Eval(Global),
    /// Projection family benchmark.
    ProjectBench(Global),
    /// Elbow sweep of k-means over batch states.
    Cluster(Global),
    /// Print every config key with its default.
    Keys,
}

#[derive(Args)]
struct Global {
    #[command(flatten)]
    common: Common,
}

fn resolve(c: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &c.config {
        cfg.merge_file(path)?;
    }
    if let Some(s) = c.seed {
        cfg.set("seed", &s.to_string())?;
    }
    if let Some(d) = &c.data {
        cfg.set("data", d)?;
    }
    if let Some(o) = &c.out {
        cfg.set("out", &o.to_string_lossy())?;
    }
    if let Some(m) = &c.models {
        cfg.set("models", &m.to_string_lossy())?;
    }
    if let Some(s) = &c.shift {
        cfg.set("shift", s)?;
    }
    if let Some(a) = &c.action {
        cfg.set("action", a)?;
    }
    for o in &c.overrides {
        cfg.merge_override(o)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Keys => {
            for (k, v, help) in shiftguard::config::KEYS {
                println!("{k} = {v}    # {help}");
            }
        }
        Command::TrainPolicy(g) => {
            let (_, log) = pipeline::cmd_train_policy(&resolve(&g.common)?)?;
            match log.terminal_moving_average(REPORT_WINDOW) {
                Some(ma) => println!("terminal reward, last {REPORT_WINDOW} episodes: {ma:.4}"),
                None => println!("no episodes run"),
            }
        }
        Command::TrainOperability(g) => {
            let s = pipeline::cmd_train_operability(&resolve(&g.common)?)?;
            for f in &s.labels.families {
                let label = match f.operable {
                    Some(true) => "operable",
                    Some(false) => "inoperable",
                    None => "undefined",
                };
                let r = f.correlation.map_or("n/a".into(), |r| format!("{r:.3}"));
                println!("{:<14} r = {r:>7} {label}", f.family.name());
            }
            println!("held-out AUROC: {:.4}", s.auroc);
        }
        Command::TrainClassifier(g) => {
            let (_, s) = pipeline::cmd_train_classifier(&resolve(&g.common)?)?;
            println!("clean test accuracy: {:.4}", s.test_accuracy);
        }
        Command::Calibrate(g) => {
            let flagged = pipeline::cmd_calibrate(&resolve(&g.common)?)?;
            if flagged.is_empty() {
                println!("every family is within the calibration range");
            } else {
                println!("outside the calibration range: {}", flagged.join(", "));
            }
        }
        Command::Recover(g) => {
            let r = pipeline::cmd_recover(&resolve(&g.common)?)?;
            println!("stop: {}  sequence: [{}]", r.stop, r.sequence.join(", "));
        }
        Command::Eval(g) => {
            for r in pipeline::cmd_eval(&resolve(&g.common)?)? {
                println!(
                    "{:<14} {} clean {:.4} shifted {:.4} recovered {:.4} delta {:+.4}",
                    r.shift, r.severity, r.acc_clean, r.acc_shifted, r.acc_recovered, r.delta
                );
            }
        }
        Command::ProjectBench(g) => {
            let rows = pipeline::cmd_project_bench(&resolve(&g.common)?)?;
            println!("{} benchmark rows written", rows.len());
        }
        Command::Cluster(g) => {
            for r in pipeline::cmd_cluster(&resolve(&g.common)?)? {
                println!("k = {:>2}  inertia {:.4}", r.k, r.inertia);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
