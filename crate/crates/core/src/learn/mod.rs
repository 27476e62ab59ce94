//! Learning primitives written from scratch: MLP with backpropagation,
//! advantage actor-critic, CART decision tree, k-means, and a small pixel
//! classifier.

mod a2c;
mod classifier;
mod kmeans;
mod mlp;
mod optim;
mod tree;

pub use a2c::{
    a2c_continue, a2c_train, advantage, epsilon, ActorCritic, Bandit, EpisodeRecord, Environment, StepRecord,
    TrainHp, TrainLog, Transition, NORMALIZATION_SAMPLES,
};
pub use classifier::{pixel_input, Classifier, ClassifierHp};
pub use kmeans::{elbow, kmeans, KMeans};
pub use mlp::{mlp_backward, softmax, Gradients, Head, Init, Layer, Mlp, Trace};
pub use optim::{Optimizer, OptimizerKind};
pub use tree::{auroc, gini, tree_fit, tree_predict, DecisionTree, Node, TreeParams};

use crate::features::StateVector;
use crate::Result;

/// Chooses an action index from a batch state.
pub trait Policy {
    fn action_count(&self) -> usize;
    fn select(&self, state: &StateVector) -> Result<usize>;
}

/// Greedy deployment policy: the actor's most probable action. Ties go to
/// the lowest index.
impl Policy for Mlp {
    fn action_count(&self) -> usize {
        self.output_dim()
    }

    fn select(&self, state: &StateVector) -> Result<usize> {
        let p = self.forward(&state.to_array())?;
        Ok(p
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
            .0)
    }
}

impl Policy for ActorCritic {
    fn action_count(&self) -> usize {
        self.actor.output_dim()
    }

    fn select(&self, state: &StateVector) -> Result<usize> {
        let x = self.input(&state.to_array());
        let x: [f64; 3] = x
            .try_into()
            .map_err(|_| crate::Error::DimMismatch { expected: 3, got: self.input_mean.len() })?;
        self.actor.select(&StateVector::from_array(x))
    }
}
