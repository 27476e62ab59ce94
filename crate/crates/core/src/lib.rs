//! Online distribution-shift detection and recovery for image classifiers.
//!
//! A corrupted batch is pushed back toward a clean validation set by a learned
//! policy that picks corrective, label-preserving image transforms. Progress is
//! measured with an empirical Wasserstein distance on orthonormally projected
//! pixels, and an operability classifier decides whether the batch is one the
//! distance can be trusted on at all.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, persistence and the
//! command line live in the `shiftguard` companion crate.
//!
//! Module map:
//!
//! - [`image`], [`synth`]: raster values and the offline shapes dataset.
//! - [`transforms`]: corruptions, corrective actions and their composition.
//! - [`haar`], [`features`]: single-level Haar DWT and the 3-d batch state.
//! - [`metrics`]: projections, Wasserstein estimators, SSIM, divergences.
//! - [`learn`]: MLP, actor-critic trainer, CART tree, k-means.
//! - [`mdp`]: the recovery environment (initial states, step, reward).
//! - [`operability`]: operability labels, gate training, batch decision.
//! - [`controller`]: transform selection with its stopping rules.

#![no_std]
// `num_traits::Float` supplies libm-backed float methods. When anything in
// the build graph pulls in std (dev-dependencies do), std's inherent methods
// take precedence and those imports go unused.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod controller;
pub mod error;
pub mod features;
pub mod haar;
pub mod image;
pub mod learn;
pub mod mdp;
pub mod metrics;
pub mod operability;
pub mod rng;
pub mod synth;
pub mod transforms;

pub use error::{Error, Result};
pub use features::StateVector;
pub use image::{Image, SampleSet};
pub use transforms::{TransformKind, TransformSequence, TransformSpec};
