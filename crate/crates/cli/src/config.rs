//! Flat `key = value` run configuration.
//!
//! Values resolve as defaults, then the config file, then command-line
//! overrides. Every key is declared up front; unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};

/// Declared keys, their defaults and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("seed", "0", "master seed for every stochastic step"),
    ("data", "synth", "`synth` or `idx:IMAGES,LABELS`"),
    ("synth_n", "2000", "synthetic dataset size"),
    ("synth_side", "28", "synthetic image side in pixels"),
    ("synth_classes", "4", "synthetic class count"),
    ("synth_seed", "0", "synthetic dataset seed"),
    ("split_train", "0.5", "leading share used to train the classifier"),
    ("split_val", "0.25", "next share used as the clean validation set"),
    ("out", "out", "output directory"),
    ("models", "", "directory holding trained models (defaults to `out`)"),
    ("batch_size", "256", "images per shifted batch"),
    ("profile", "paper-imagenet", "surrogate corruption profile"),
    ("training_families", "uniform_noise,gamma_a", "surrogates the policy trains against"),
    ("lambda", "20", "similarity regularizer weight"),
    ("omega", "0.994", "similarity gate"),
    ("gamma", "0.9", "discount factor"),
    ("horizon", "5", "maximum transforms per episode and per recovery"),
    ("reward_estimator", "exact", "`exact` or `sliced` distance in the reward"),
    ("estimator", "sliced", "`exact` or `sliced` distance in the stopping rules"),
    ("proj_dim", "64", "projection target dimension"),
    ("slices", "128", "sliced estimator directions"),
    ("p", "1", "Wasserstein order (1 or 2)"),
    ("estimator_seed", "0", "projection and slice seed"),
    ("projection", "orthonormal", "`orthonormal`, `gaussian` or `sparse`"),
    ("intensity_scale", "255", "pixel multiplier before projecting"),
    ("episodes", "500", "training episodes (about 1600 at paper scale)"),
    ("learning_rate", "0.0001", "actor and critic learning rate"),
    ("epsilon_base", "0.9", "exploration base"),
    ("epsilon_rate", "0.07", "exploration decay exponent per episode"),
    ("epsilon_floor", "0.1", "exploration floor"),
    ("hidden", "128,256", "actor and critic hidden layer sizes"),
    ("optimizer", "adam", "`sgd` or `adam`"),
    ("reward_scale", "0.00392156862745098", "reward multiplier inside the advantage"),
    ("normalize_inputs", "true", "standardize state inputs"),
    ("grad_clip", "none", "gradient norm clip or `none`"),
    ("alpha", "0.9", "success threshold"),
    ("beta", "0.995", "harm threshold"),
    ("literal", "false", "discard the transform evaluated at a success stop"),
    ("r_max", "-0.3", "operability correlation threshold"),
    ("gate_threshold", "0.5", "inoperable image share that fires the gate"),
    ("holdout", "0.3", "held-out share for the gate AUROC"),
    ("tree_depth", "8", "gate tree maximum depth"),
    ("min_leaf", "5", "gate tree minimum leaf size"),
    ("classifier_hidden", "64", "classifier hidden layer sizes"),
    ("classifier_epochs", "15", "classifier epochs"),
    ("classifier_lr", "0.05", "classifier learning rate"),
    ("classifier_batch", "16", "classifier mini-batch size"),
    ("shift", "identity", "shift applied by `recover`"),
    ("action", "", "fixed one-step action for `recover` instead of the policy"),
    ("trials", "3", "evaluation trials per cell"),
    ("eval_shifts", "identity,uniform_noise,gamma_a", "evaluated surrogate families"),
    ("eval_severities", "3,4,5", "evaluated severities"),
    ("bench_sizes", "32,64,128,256", "projection benchmark sample sizes"),
    ("bench_dim", "50", "projection benchmark target dimension"),
    ("bench_trials", "3", "projection benchmark trials"),
    ("cluster_k", "10", "largest k in the elbow sweep"),
    ("cluster_samples", "4", "sub-batches per surrogate cell for clustering"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

fn declared(key: &str) -> anyhow::Result<&'static str> {
    KEYS.iter()
        .map(|(k, _, _)| *k)
        .find(|k| *k == key)
        .ok_or_else(|| anyhow!("unknown config key `{key}`"))
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (*k, v.to_string())).collect(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        let key = declared(key)?;
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn merge_text(&mut self, text: &str) -> anyhow::Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            self.set(k.trim(), v).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        self.merge_text(&text)
            .with_context(|| format!("in config {}", path.display()))
    }

    /// Applies a `key=value` override.
    pub fn merge_override(&mut self, assignment: &str) -> anyhow::Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{assignment}` is not `key=value`"))?;
        self.set(k.trim(), v)
    }

    pub fn str(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("config key `{key}` is not declared"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> anyhow::Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.str(key);
        raw.parse()
            .map_err(|e| anyhow!("config key `{key}`: cannot parse `{raw}`: {e}"))
    }

    pub fn bool(&self, key: &str) -> anyhow::Result<bool> {
        match self.str(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => bail!("config key `{key}`: expected true or false, found `{other}`"),
        }
    }

    /// Comma-separated list; empty text is the empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> anyhow::Result<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let raw = self.str(key);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|e| anyhow!("config key `{key}`: cannot parse `{t}`: {e}"))
            })
            .collect()
    }

    /// `None` for `none` or empty text.
    pub fn optional<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.str(key) {
            "" | "none" => Ok(None),
            _ => self.get(key).map(Some),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.str("out"))
    }

    pub fn models_dir(&self) -> PathBuf {
        match self.str("models") {
            "" => self.out_dir(),
            m => PathBuf::from(m),
        }
    }

    /// The resolved configuration in declaration order, re-readable with
    /// [`RunConfig::merge_text`].
    pub fn render(&self) -> String {
        KEYS.iter()
            .map(|(k, _, _)| format!("{k} = {}\n", self.values[k]))
            .collect()
    }
}
