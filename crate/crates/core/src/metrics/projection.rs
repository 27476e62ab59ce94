//! Linear maps `x ↦ Vx + b` from `n` down to `m` dimensions.
//!
//! The orthonormal family has `V Vᵀ = I_m` (rows on the Stiefel manifold),
//! so it never expands distances. The Gaussian and sparse families are the
//! usual Johnson–Lindenstrauss random projections, kept for comparison.

use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::PointCloud;
use crate::rng::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionFamily {
    Orthonormal,
    Gaussian,
    Sparse,
}

impl ProjectionFamily {
    pub const ALL: [ProjectionFamily; 3] = [Self::Orthonormal, Self::Gaussian, Self::Sparse];

    pub fn name(self) -> &'static str {
        match self {
            Self::Orthonormal => "orthonormal",
            Self::Gaussian => "gaussian",
            Self::Sparse => "sparse",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Density parameter `s` of the sparse family (non-zero with probability 1/s).
pub const SPARSE_S: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    rows: usize,
    cols: usize,
    matrix: Vec<f64>,
    offset: Vec<f64>,
    seed: u64,
    family: ProjectionFamily,
}

pub fn make_projection(n: usize, m: usize, family: ProjectionFamily, seed: u64) -> Result<Projection> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("projection dimensions must be positive".into()));
    }
    if m > n {
        return Err(Error::ProjectionDim { m, n });
    }
    let mut r = rng(seed);
    let matrix = match family {
        ProjectionFamily::Orthonormal => {
            let mut a: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut r)).collect();
            orthonormalize_rows(&mut a, m, n);
            a
        }
        ProjectionFamily::Gaussian => {
            let sd = 1.0 / (m as f64).sqrt();
            (0..m * n)
                .map(|_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut r))
                .collect()
        }
        ProjectionFamily::Sparse => {
            let v = (SPARSE_S / m as f64).sqrt();
            let half = 1.0 / (2.0 * SPARSE_S);
            (0..m * n)
                .map(|_| {
                    let u: f64 = r.random();
                    if u < half {
                        -v
                    } else if u < 2.0 * half {
                        v
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    Ok(Projection {
        rows: m,
        cols: n,
        matrix,
        offset: alloc::vec![0.0; m],
        seed,
        family,
    })
}

/// Modified Gram–Schmidt over the rows, run twice for numerical orthogonality.
fn orthonormalize_rows(a: &mut [f64], m: usize, n: usize) {
    for _pass in 0..2 {
        for i in 0..m {
            for j in 0..i {
                let (head, tail) = a.split_at_mut(i * n);
                let prev = &head[j * n..(j + 1) * n];
                let row = &mut tail[..n];
                let d: f64 = prev.iter().zip(row.iter()).map(|(p, r)| p * r).sum();
                for (r, p) in row.iter_mut().zip(prev) {
                    *r -= d * p;
                }
            }
            let row = &mut a[i * n..(i + 1) * n];
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
}

impl Projection {
    pub fn target_dim(&self) -> usize {
        self.rows
    }

    pub fn ambient_dim(&self) -> usize {
        self.cols
    }

    pub fn family(&self) -> ProjectionFamily {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn with_offset(mut self, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != self.rows {
            return Err(Error::DimMismatch {
                expected: self.rows,
                got: offset.len(),
            });
        }
        self.offset = offset;
        Ok(self)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok(self
            .matrix
            .chunks_exact(self.cols)
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).map(|(v, x)| v * x).sum::<f64>() + b)
            .collect())
    }

    pub fn project_cloud(&self, cloud: &PointCloud) -> Result<PointCloud> {
        let mut out = Vec::with_capacity(cloud.len() * self.rows);
        for p in cloud.points() {
            out.extend(self.apply(p)?);
        }
        PointCloud::new(self.rows, out)
    }

    /// Frobenius norm of `V Vᵀ − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.rows {
                let ri = &self.matrix[i * self.cols..(i + 1) * self.cols];
                let rj = &self.matrix[j * self.cols..(j + 1) * self.cols];
                let d: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                let e = d - if i == j { 1.0 } else { 0.0 };
                acc += e * e;
            }
        }
        acc.sqrt()
    }
}
