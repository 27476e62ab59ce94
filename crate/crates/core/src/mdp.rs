//! The recovery environment. A state is the current batch (plus the batch
//! the episode started from); actions are library transforms; the reward of
//! a step is `−W̃(V, next) + λ·L_S(start, next)` with
//! `L_S = ln(1 − ssim)` when `ssim < ω` and 0 otherwise.
//!
//! Episodes start from a clean sub-batch corrupted by a uniformly drawn
//! training surrogate (family, severity) and last `horizon` steps.
//!
//! The reward's distance defaults to the exact empirical Wasserstein
//! distance on the projected pixels. With the sliced estimate the
//! similarity term is an order of magnitude larger than any distance
//! improvement and every state's best action becomes identity.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Float;
use rand::seq::index::sample;
use rand::Rng as _;

use crate::features::{batch_state, StateVector};
use crate::image::SampleSet;
use crate::learn::{Environment, Transition};
use crate::metrics::{batch_ssim, DistanceEstimator, Estimator, EstimatorConfig};
use crate::rng::{mix, rng};
use crate::transforms::{action_library, apply, surrogate_cells, SurrogateFamily, TransformSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub lambda: f64,
    pub omega: f64,
    pub gamma: f64,
    pub horizon: usize,
    pub estimator: EstimatorConfig,
    pub profile: String,
    pub training_families: Vec<SurrogateFamily>,
    pub batch_size: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            lambda: 20.0,
            omega: 0.994,
            gamma: 0.9,
            horizon: 5,
            estimator: EstimatorConfig::exact(),
            profile: "paper-imagenet".to_string(),
            training_families: SurrogateFamily::POLICY_TRAINING.to_vec(),
            batch_size: 256,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.omega) {
            return Err(Error::Config("omega must lie in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config("gamma must lie in [0, 1)".into()));
        }
        if self.horizon == 0 || self.batch_size == 0 {
            return Err(Error::Config("horizon and batch size must be positive".into()));
        }
        if self.training_families.is_empty() {
            return Err(Error::Config("at least one training surrogate is needed".into()));
        }
        self.estimator.validate()
    }
}

/// The similarity regularizer: `ln(1 − ssim)` below the gate, else 0.
pub fn similarity_penalty(ssim: f64, omega: f64) -> f64 {
    if ssim < omega {
        (1.0 - ssim).ln()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    batch: SampleSet,
    original: SampleSet,
    t: usize,
    features: StateVector,
    /// The surrogate cell the episode started from, if any.
    pub origin: Option<(SurrogateFamily, u8)>,
}

impl EnvState {
    /// A state starting at `batch` with no surrogate provenance.
    pub fn from_batch(batch: SampleSet) -> Result<Self> {
        let features = batch_state(&batch)?;
        Ok(Self {
            original: batch.clone(),
            batch,
            t: 0,
            features,
            origin: None,
        })
    }

    pub fn batch(&self) -> &SampleSet {
        &self.batch
    }

    pub fn original(&self) -> &SampleSet {
        &self.original
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn features(&self) -> StateVector {
        self.features
    }
}

/// Reward components of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub wasserstein: f64,
    pub ssim: f64,
    pub done: bool,
}

pub struct RecoveryEnv {
    cfg: EnvConfig,
    clean: SampleSet,
    estimator: Estimator,
    actions: Vec<TransformSpec>,
    cells: Vec<(SurrogateFamily, TransformSpec)>,
    current: Option<EnvState>,
}

impl RecoveryEnv {
    /// Environment over the clean validation set `clean` with the standard
    /// action library.
    pub fn new(cfg: EnvConfig, clean: SampleSet) -> Result<Self> {
        Self::with_actions(cfg, clean, action_library())
    }

    pub fn with_actions(cfg: EnvConfig, clean: SampleSet, actions: Vec<TransformSpec>) -> Result<Self> {
        cfg.validate()?;
        if clean.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if actions.is_empty() {
            return Err(Error::Config("empty action set".into()));
        }
        let estimator = Estimator::new(&clean, cfg.estimator.clone())?;
        let cells = surrogate_cells(&cfg.profile)?
            .into_iter()
            .filter(|(f, _)| cfg.training_families.contains(f))
            .collect();
        Ok(Self {
            cfg,
            clean,
            estimator,
            actions,
            cells,
            current: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn clean(&self) -> &SampleSet {
        &self.clean
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    pub fn actions(&self) -> &[TransformSpec] {
        &self.actions
    }

    /// The training surrogate cells initial states are drawn from.
    pub fn cells(&self) -> &[(SurrogateFamily, TransformSpec)] {
        &self.cells
    }

    /// A random clean sub-batch of the configured size.
    pub fn clean_subbatch(&self, seed: u64) -> SampleSet {
        let n = self.clean.len();
        let k = self.cfg.batch_size.min(n);
        let mut idx = sample(&mut rng(seed), n, k).into_vec();
        idx.sort_unstable();
        self.clean.select(&idx)
    }

    pub fn sample_initial(&self, seed: u64) -> Result<EnvState> {
        let cell = rng(mix(seed, 0)).random_range(0..self.cells.len());
        let (family, spec) = &self.cells[cell];
        let batch = apply(spec, &self.clean_subbatch(mix(seed, 1)), mix(seed, 2))?;
        let mut state = EnvState::from_batch(batch)?;
        state.origin = Some((*family, spec.severity().unwrap_or(0)));
        Ok(state)
    }

    /// Applies `action` to `state`.
    pub fn step_state(&self, state: &EnvState, action: &TransformSpec, seed: u64) -> Result<(EnvState, StepOutcome)> {
        if state.t >= self.cfg.horizon {
            return Err(Error::EpisodeDone);
        }
        let next = apply(action, &state.batch, seed)?;
        let wasserstein = self.estimator.distance(&next)?;
        let ssim = batch_ssim(&state.original, &next)?;
        let reward = -wasserstein + self.cfg.lambda * similarity_penalty(ssim, self.cfg.omega);
        let t = state.t + 1;
        let next_state = EnvState {
            features: batch_state(&next)?,
            batch: next,
            original: state.original.clone(),
            t,
            origin: state.origin,
        };
        Ok((
            next_state,
            StepOutcome {
                reward,
                wasserstein,
                ssim,
                done: t == self.cfg.horizon,
            },
        ))
    }

    pub fn current(&self) -> Option<&EnvState> {
        self.current.as_ref()
    }
}

impl Environment for RecoveryEnv {
    fn state_dim(&self) -> usize {
        StateVector::DIM
    }

    fn action_count(&self) -> usize {
        self.actions.len()
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let s = self.sample_initial(seed)?;
        let v = s.features.to_array().to_vec();
        self.current = Some(s);
        Ok(v)
    }

    fn step(&mut self, action: usize, seed: u64) -> Result<Transition> {
        let state = self.current.as_ref().ok_or(Error::EpisodeDone)?;
        let spec = self.actions.get(action).ok_or_else(|| {
            Error::InvalidArgument(alloc::format!("action {action} outside the library"))
        })?;
        let (next, out) = self.step_state(state, spec, seed)?;
        let v = next.features.to_array().to_vec();
        self.current = if out.done { None } else { Some(next) };
        Ok(Transition {
            state: v,
            reward: out.reward,
            done: out.done,
            wasserstein: Some(out.wasserstein),
            ssim: Some(out.ssim),
        })
    }

    fn action_name(&self, action: usize) -> String {
        self.actions.get(action).map(|a| a.to_string()).unwrap_or_default()
    }
}

/// Calibration of one surrogate family against its designated state index.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub family: SurrogateFamily,
    pub index: usize,
    /// `|(F(T_s(V))_i − F(V)_i) / F(V)_i|` for severities 1..=5.
    pub relative_change: Vec<f64>,
    /// Severity-5 change within `[0.3, 1.0]`.
    pub in_range: bool,
    /// Relative change non-decreasing over severities.
    pub monotone: bool,
}

pub const CALIBRATION_RANGE: (f64, f64) = (0.3, 1.0);

/// Relative change of each family's calibration index per severity on
/// `clean`.
pub fn calibrate_severities(profile: &str, clean: &SampleSet, seed: u64) -> Result<Vec<CalibrationRow>> {
    let base = batch_state(clean)?;
    let cells = surrogate_cells(profile)?;
    let mut rows: Vec<CalibrationRow> = Vec::new();
    for (i, (family, spec)) in cells.iter().enumerate() {
        let index = family.calibration_index();
        let shifted = batch_state(&apply(spec, clean, mix(seed, i as u64))?)?;
        let reference = base.get(index);
        let change = if reference == 0.0 {
            f64::INFINITY
        } else {
            ((shifted.get(index) - reference) / reference).abs()
        };
        match rows.last_mut() {
            Some(row) if row.family == *family => row.relative_change.push(change),
            _ => rows.push(CalibrationRow {
                family: *family,
                index,
                relative_change: alloc::vec![change],
                in_range: false,
                monotone: false,
            }),
        }
    }
    for row in &mut rows {
        let top = *row.relative_change.last().expect("five severities");
        row.in_range = (CALIBRATION_RANGE.0..=CALIBRATION_RANGE.1).contains(&top);
        row.monotone = row.relative_change.windows(2).all(|w| w[1] >= w[0]);
    }
    Ok(rows)
}
