//! Operability: whether the batch distance can be trusted to track accuracy
//! under a shift.
//!
//! A shift family is *operable* when, across its severity ladder, the
//! distance `d(V, T_s(V_c))` is negatively correlated with a reference
//! classifier's accuracy (Pearson `r ≤ r_max`). Per-image state vectors of
//! every corrupted batch inherit their family's label, a decision tree
//! learns the labels, and a batch is gated out when more than a threshold
//! fraction of its images classify as inoperable.

use alloc::vec::Vec;

use num_traits::Float;
use rand::seq::SliceRandom;

use crate::features::{per_image_states, StateVector};
use crate::image::SampleSet;
use crate::learn::{auroc, tree_fit, Classifier, DecisionTree, TreeParams};
use crate::metrics::{pearson, DistanceEstimator};
use crate::rng::{mix, rng};
use crate::transforms::{apply, SurrogateFamily, TransformSpec};
use crate::{Error, Result};

pub const DEFAULT_R_MAX: f64 = -0.3;
pub const DEFAULT_FRACTION: f64 = 0.5;

/// The operability predicate on a severity ladder.
pub fn is_operable(distances: &[f64], accuracies: &[f64], r_max: f64) -> Result<bool> {
    Ok(pearson(distances, accuracies)? <= r_max)
}

/// Ladder measurements and the resulting label of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyLabel {
    pub family: SurrogateFamily,
    pub distances: Vec<f64>,
    pub accuracies: Vec<f64>,
    /// `None` when the correlation is undefined (zero variance).
    pub correlation: Option<f64>,
    pub operable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeature {
    pub features: StateVector,
    pub family: SurrogateFamily,
    pub severity: u8,
    pub inoperable: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledSet {
    pub families: Vec<FamilyLabel>,
    pub rows: Vec<LabeledFeature>,
}

impl LabeledSet {
    pub fn label_of(&self, family: SurrogateFamily) -> Option<bool> {
        self.families.iter().find(|f| f.family == family).and_then(|f| f.operable)
    }
}

/// Labels each family's ladder on the labeled clean pool `clean`, measuring
/// distance with `distance` (whose reference is `V`) and accuracy with
/// `reference`.
pub fn generate_labels(
    clean: &SampleSet,
    ladders: &[(SurrogateFamily, Vec<TransformSpec>)],
    reference: &Classifier,
    distance: &dyn DistanceEstimator,
    r_max: f64,
    seed: u64,
) -> Result<LabeledSet> {
    let mut out = LabeledSet::default();
    for (fi, (family, ladder)) in ladders.iter().enumerate() {
        if ladder.len() < 3 {
            return Err(Error::InvalidArgument("a severity ladder needs at least three steps".into()));
        }
        let mut distances = Vec::with_capacity(ladder.len());
        let mut accuracies = Vec::with_capacity(ladder.len());
        let mut states = Vec::with_capacity(ladder.len());
        for (si, spec) in ladder.iter().enumerate() {
            let batch = apply(spec, clean, mix(mix(seed, fi as u64), si as u64))?;
            distances.push(distance.distance(&batch)?);
            accuracies.push(reference.accuracy(&batch)?);
            let severity = spec.severity().unwrap_or(si as u8 + 1);
            states.push((severity, per_image_states(&batch)));
        }
        let correlation = match pearson(&distances, &accuracies) {
            Ok(r) => Some(r),
            Err(Error::DegenerateCorrelation) => None,
            Err(e) => return Err(e),
        };
        let operable = correlation.map(|r| r <= r_max);
        if let Some(op) = operable {
            for (severity, vs) in states {
                out.rows.extend(vs.into_iter().map(|features| LabeledFeature {
                    features,
                    family: *family,
                    severity,
                    inoperable: !op,
                }));
            }
        }
        out.families.push(FamilyLabel {
            family: *family,
            distances,
            accuracies,
            correlation,
            operable,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedGate {
    pub tree: DecisionTree,
    /// AUROC on the held-out rows.
    pub auroc: f64,
    pub train_rows: usize,
    pub holdout_rows: usize,
}

/// Fits the gate on a random `1 − holdout` share of the rows and scores the
/// rest.
pub fn train_operability(rows: &[LabeledFeature], params: TreeParams, holdout: f64, seed: u64) -> Result<TrainedGate> {
    if rows.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let ones = rows.iter().filter(|r| r.inoperable).count();
    if ones == 0 || ones == rows.len() {
        return Err(Error::SingleClass);
    }
    if !(0.0..1.0).contains(&holdout) {
        return Err(Error::Config("holdout share must lie in [0, 1)".into()));
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng(seed));
    let n_hold = ((rows.len() as f64) * holdout).round() as usize;
    let (hold, train) = order.split_at(n_hold);
    let xs: Vec<[f64; 3]> = train.iter().map(|&i| rows[i].features.to_array()).collect();
    let ys: Vec<bool> = train.iter().map(|&i| rows[i].inoperable).collect();
    let tree = tree_fit(&xs, &ys, params)?;
    let (eval_idx, eval_rows) = if hold.is_empty() { (train, train.len()) } else { (hold, hold.len()) };
    let scores: Vec<f64> = eval_idx
        .iter()
        .map(|&i| tree.predict(&rows[i].features.to_array()))
        .collect::<Result<_>>()?;
    let labels: Vec<bool> = eval_idx.iter().map(|&i| rows[i].inoperable).collect();
    Ok(TrainedGate {
        auroc: auroc(&scores, &labels)?,
        tree,
        train_rows: train.len(),
        holdout_rows: if hold.is_empty() { 0 } else { eval_rows },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDecision {
    pub inoperable: bool,
    pub fraction: f64,
}

/// Per-image vote: the batch is inoperable iff the share of images the tree
/// calls inoperable exceeds `threshold`.
pub fn batch_operable(tree: &DecisionTree, batch: &SampleSet, threshold: f64) -> Result<GateDecision> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut count = 0usize;
    for s in per_image_states(batch) {
        if tree.classify(&s.to_array())? {
            count += 1;
        }
    }
    let fraction = count as f64 / batch.len() as f64;
    Ok(GateDecision {
        inoperable: fraction > threshold,
        fraction,
    })
}

/// Anything that can decide whether a batch is inoperable.
pub trait OperabilityGate {
    fn assess(&self, batch: &SampleSet) -> Result<GateDecision>;
}

/// A fitted tree with its batch-fraction threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeGate {
    pub tree: DecisionTree,
    pub threshold: f64,
}

impl OperabilityGate for TreeGate {
    fn assess(&self, batch: &SampleSet) -> Result<GateDecision> {
        batch_operable(&self.tree, batch, self.threshold)
    }
}

/// A gate that never fires.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysOperable;

impl OperabilityGate for AlwaysOperable {
    fn assess(&self, _batch: &SampleSet) -> Result<GateDecision> {
        Ok(GateDecision {
            inoperable: false,
            fraction: 0.0,
        })
    }
}
