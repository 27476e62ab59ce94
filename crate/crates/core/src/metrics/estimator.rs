//! The batch distance used by the environment and the controller: grayscale,
//! flatten, project to `dim` coordinates, then a sliced (or exact)
//! Wasserstein distance to a fixed reference batch.
//!
//! Projection and slice directions are drawn once per estimator from its
//! seed, so successive distances to the same reference are comparable.

use alloc::vec::Vec;

use rand::seq::index::sample;

use super::projection::{make_projection, Projection, ProjectionFamily};
use super::wasserstein::{check_order, sliced_from_sorted, wasserstein_exact, SliceDirections};
use super::PointCloud;
use crate::image::{to_grayscale, SampleSet};
use crate::{Error, Result};

/// Distance from a fixed reference batch.
pub trait DistanceEstimator {
    fn distance(&self, batch: &SampleSet) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Target dimension of the projection.
    pub dim: usize,
    pub slices: usize,
    pub p: u32,
    pub seed: u64,
    pub family: ProjectionFamily,
    /// Pixels are multiplied by this before projecting; 255 reports
    /// distances on the 8-bit intensity scale.
    pub intensity_scale: f64,
    /// Use the assignment solver instead of slicing. When the two batches
    /// differ in size, the larger one is subsampled (seeded) to match.
    pub exact: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            slices: 128,
            p: 1,
            seed: 0,
            family: ProjectionFamily::Orthonormal,
            intensity_scale: 255.0,
            exact: false,
        }
    }
}

impl EstimatorConfig {
    /// The default projection with the exact assignment solver: the empirical
    /// Wasserstein distance the recovery reward is defined on.
    pub fn exact() -> Self {
        Self {
            exact: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.p)?;
        if self.dim == 0 || self.slices == 0 {
            return Err(Error::Config("estimator dim and slices must be positive".into()));
        }
        if !(self.intensity_scale > 0.0 && self.intensity_scale.is_finite()) {
            return Err(Error::Config("intensity_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Grayscale pixels of each image as one point, multiplied by `scale`.
pub fn flatten(batch: &SampleSet, scale: f64) -> Result<PointCloud> {
    let (w, h, _) = batch.shape().ok_or(Error::EmptyBatch)?;
    let mut data = Vec::with_capacity(batch.len() * w * h);
    for img in batch.images() {
        data.extend(to_grayscale(img).data().iter().map(|v| v * scale));
    }
    PointCloud::new(w * h, data)
}

/// Exact distance between clouds of possibly different sizes: the larger
/// one is reduced to a seeded subsample of the smaller one's size.
fn exact_matched(a: &PointCloud, b: &PointCloud, p: u32, seed: u64) -> Result<f64> {
    let subsample = |c: &PointCloud, n: usize| -> Result<PointCloud> {
        let mut idx = sample(&mut crate::rng::rng(crate::rng::mix(seed, 2)), c.len(), n).into_vec();
        idx.sort_unstable();
        let mut data = Vec::with_capacity(n * c.dim());
        for i in idx {
            data.extend_from_slice(c.point(i));
        }
        PointCloud::new(c.dim(), data)
    };
    match a.len().cmp(&b.len()) {
        core::cmp::Ordering::Equal => wasserstein_exact(a, b, p),
        core::cmp::Ordering::Greater => wasserstein_exact(&subsample(a, b.len())?, b, p),
        core::cmp::Ordering::Less => wasserstein_exact(a, &subsample(b, a.len())?, p),
    }
}

#[derive(Debug, Clone)]
pub struct Estimator {
    config: EstimatorConfig,
    projection: Projection,
    directions: SliceDirections,
    reference: PointCloud,
    reference_sorted: Vec<Vec<f64>>,
}

impl Estimator {
    pub fn new(reference: &SampleSet, config: EstimatorConfig) -> Result<Self> {
        config.validate()?;
        let raw = flatten(reference, config.intensity_scale)?;
        let projection = make_projection(raw.dim(), config.dim, config.family, config.seed)?;
        let directions = SliceDirections::random(config.dim, config.slices, crate::rng::mix(config.seed, 1))?;
        let reference = projection.project_cloud(&raw)?;
        let reference_sorted = directions.sorted_projections(&reference);
        Ok(Self {
            config,
            projection,
            directions,
            reference,
            reference_sorted,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    /// Projected point cloud of a batch.
    pub fn embed(&self, batch: &SampleSet) -> Result<PointCloud> {
        let raw = flatten(batch, self.config.intensity_scale)?;
        if raw.dim() != self.projection.ambient_dim() {
            return Err(Error::DimMismatch {
                expected: self.projection.ambient_dim(),
                got: raw.dim(),
            });
        }
        self.projection.project_cloud(&raw)
    }

    /// Distance between two arbitrary batches under this estimator's
    /// projection and slices.
    pub fn distance_between(&self, a: &SampleSet, b: &SampleSet) -> Result<f64> {
        let (ea, eb) = (self.embed(a)?, self.embed(b)?);
        if self.config.exact {
            return exact_matched(&ea, &eb, self.config.p, self.config.seed);
        }
        Ok(sliced_from_sorted(
            &self.directions.sorted_projections(&ea),
            &self.directions.sorted_projections(&eb),
            self.config.p,
        ))
    }
}

impl DistanceEstimator for Estimator {
    fn distance(&self, batch: &SampleSet) -> Result<f64> {
        let e = self.embed(batch)?;
        if self.config.exact {
            return exact_matched(&self.reference, &e, self.config.p, self.config.seed);
        }
        Ok(sliced_from_sorted(
            &self.reference_sorted,
            &self.directions.sorted_projections(&e),
            self.config.p,
        ))
    }
}
