//! Runtime transform selection with an operability gate and two stopping
//! rules.
//!
//! Starting from `w₀ = W̃(V, V_c)`, each round checks the gate on the current
//! batch, applies the policy's greedy action and measures `wᵢ`. The run stops
//! on success (`wᵢ ≤ α·w₀`), on harm (`wᵢ ≥ β·wᵢ₋₁`) or at the horizon.
//! By default the transform that achieved success is kept; literal mode
//! discards the transform evaluated at any stopping step.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::features::batch_state;
use crate::image::SampleSet;
use crate::learn::Policy;
use crate::metrics::{DistanceEstimator, Estimator, EstimatorConfig};
use crate::operability::OperabilityGate;
use crate::transforms::{apply, compose, TransformSequence, TransformSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub alpha: f64,
    pub beta: f64,
    pub horizon: usize,
    pub literal: bool,
    pub estimator: EstimatorConfig,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            beta: 0.995,
            horizon: 5,
            literal: false,
            estimator: EstimatorConfig::default(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config("alpha must lie in (0, 1]".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if self.literal && self.beta > 1.0 {
            return Err(Error::Config("literal mode requires beta <= 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Inoperable,
    Success,
    Harm,
    Horizon,
}

impl StopReason {
    pub const ALL: [StopReason; 4] = [Self::Inoperable, Self::Success, Self::Harm, Self::Horizon];

    pub fn name(self) -> &'static str {
        match self {
            Self::Inoperable => "inoperable",
            Self::Success => "success",
            Self::Harm => "harm",
            Self::Horizon => "horizon",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown stop reason `{s}`")))
    }
}

/// Trace of one selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    /// Kept transforms in application order.
    pub sequence: TransformSequence,
    /// Every distance the stopping rules consulted, `w₀` first.
    pub distances: Vec<f64>,
    pub stop: StopReason,
    /// Gate fraction observed at each round.
    pub inoperable_fractions: Vec<f64>,
}

/// Report plus the batch obtained by applying the kept transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub report: RecoveryReport,
    pub recovered: SampleSet,
}

/// Runs the selection loop against a prepared estimator whose reference is
/// the clean set.
pub fn run_selection(
    corrupted: &SampleSet,
    estimator: &dyn DistanceEstimator,
    policy: &dyn Policy,
    gate: &dyn OperabilityGate,
    actions: &[TransformSpec],
    cfg: &ControllerConfig,
    seed: u64,
) -> Result<Selection> {
    cfg.validate()?;
    if policy.action_count() != actions.len() {
        return Err(Error::ActionCount {
            policy: policy.action_count(),
            library: actions.len(),
        });
    }
    if corrupted.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let w0 = estimator.distance(corrupted)?;
    let mut distances = alloc::vec![w0];
    let mut fractions = Vec::new();
    let mut sequence = TransformSequence::default();
    let mut current = corrupted.clone();
    let finish = |sequence, distances, stop, fractions, recovered| {
        Ok(Selection {
            report: RecoveryReport {
                sequence,
                distances,
                stop,
                inoperable_fractions: fractions,
            },
            recovered,
        })
    };
    for _ in 0..cfg.horizon {
        let gate_now = gate.assess(&current)?;
        fractions.push(gate_now.fraction);
        if gate_now.inoperable {
            return finish(sequence, distances, StopReason::Inoperable, fractions, current);
        }
        let action = &actions[policy.select(&batch_state(&current)?)?];
        let next = apply(action, &current, seed)?;
        let w = estimator.distance(&next)?;
        let previous = *distances.last().expect("w0 recorded");
        distances.push(w);
        if w <= cfg.alpha * w0 {
            if cfg.literal {
                return finish(sequence, distances, StopReason::Success, fractions, current);
            }
            sequence.push(action.clone());
            return finish(sequence, distances, StopReason::Success, fractions, next);
        }
        if w >= cfg.beta * previous {
            return finish(sequence, distances, StopReason::Harm, fractions, current);
        }
        sequence.push(action.clone());
        current = next;
    }
    finish(sequence, distances, StopReason::Horizon, fractions, current)
}

/// Selection against the clean set `clean` with the configured estimator.
pub fn select_transforms(
    clean: &SampleSet,
    corrupted: &SampleSet,
    policy: &dyn Policy,
    gate: &dyn OperabilityGate,
    actions: &[TransformSpec],
    cfg: &ControllerConfig,
    seed: u64,
) -> Result<RecoveryReport> {
    let estimator = Estimator::new(clean, cfg.estimator.clone())?;
    Ok(run_selection(corrupted, &estimator, policy, gate, actions, cfg, seed)?.report)
}

/// Applies the report's sequence to `corrupted`, first transform first.
pub fn recover(corrupted: &SampleSet, report: &RecoveryReport, seed: u64) -> Result<SampleSet> {
    compose(&report.sequence, corrupted, seed)
}
