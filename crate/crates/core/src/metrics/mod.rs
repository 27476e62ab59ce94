//! Distances between image batches and the statistics built on them.

mod divergence;
mod estimator;
mod projection;
mod ssim;
mod stats;
mod wasserstein;

use alloc::vec::Vec;

use crate::{Error, Result};

pub use divergence::{histogram_divergence, sliced_divergence, Divergence};
pub use estimator::{flatten, DistanceEstimator, Estimator, EstimatorConfig};
pub use projection::{make_projection, Projection, ProjectionFamily};
pub use ssim::{batch_ssim, ssim};
pub use stats::{mean, pearson};
pub use wasserstein::{
    assignment, check_order, wasserstein_1d, wasserstein_exact, wasserstein_sliced, SliceDirections,
};

/// Equal-weight empirical measure: `len` points in `dim` dimensions, stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "point cloud needs a positive multiple of dim {dim} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != dim) {
            return Err(Error::InvalidArgument("rows differ in length".into()));
        }
        Self::new(dim, rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}
