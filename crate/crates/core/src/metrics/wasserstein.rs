//! Empirical p-Wasserstein distances between equal-weight point clouds.
//!
//! [`wasserstein_exact`] solves the assignment problem (Hungarian method,
//! O(n³)) and serves as the oracle. [`wasserstein_sliced`] averages closed
//! form 1-D distances over random unit directions; it is the cheap
//! estimator used everywhere else.

use alloc::vec::Vec;

use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use super::PointCloud;
use crate::rng::rng;
use crate::{Error, Result};

pub fn check_order(p: u32) -> Result<()> {
    match p {
        1 | 2 => Ok(()),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

#[inline]
fn pow_p(x: f64, p: u32) -> f64 {
    if p == 1 {
        x.abs()
    } else {
        x * x
    }
}

#[inline]
fn root_p(x: f64, p: u32) -> f64 {
    if p == 1 {
        x
    } else {
        x.sqrt()
    }
}

/// Minimum-cost perfect matching of an `n`×`n` row-major cost matrix.
///
/// Returns the column assigned to each row and the total cost, summed in
/// row order.
pub fn assignment(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    let inf = f64::INFINITY;
    // 1-based potentials; `matched[j]` is the row matched to column j.
    let mut u = alloc::vec![0.0; n + 1];
    let mut v = alloc::vec![0.0; n + 1];
    let mut matched = alloc::vec![0usize; n + 1];
    let mut way = alloc::vec![0usize; n + 1];
    for row in 1..=n {
        matched[0] = row;
        let mut j0 = 0;
        let mut minv = alloc::vec![inf; n + 1];
        let mut used = alloc::vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut cols = alloc::vec![0usize; n];
    for j in 1..=n {
        cols[matched[j] - 1] = j - 1;
    }
    let total = cols.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    (cols, total)
}

/// Exact `W_p` between equal-size clouds. One-dimensional clouds are
/// matched by sorting.
pub fn wasserstein_exact(a: &PointCloud, b: &PointCloud, p: u32) -> Result<f64> {
    check_order(p)?;
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.dim() == 1 {
        return wasserstein_1d(a.data(), b.data(), p);
    }
    let n = a.len();
    let mut cost = Vec::with_capacity(n * n);
    for x in a.points() {
        for y in b.points() {
            let d2: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
            cost.push(if p == 1 { d2.sqrt() } else { d2 });
        }
    }
    let (_, total) = assignment(&cost, n);
    Ok(root_p(total / n as f64, p))
}

/// `W_p^p` between two sorted samples via their quantile functions. Sizes may
/// differ; for equal sizes this is the mean of `|x_(i) − y_(i)|^p`.
fn w1d_pow_sorted(xs: &[f64], ys: &[f64], p: u32) -> f64 {
    let (na, nb) = (xs.len(), ys.len());
    if na == nb {
        return xs.iter().zip(ys).map(|(x, y)| pow_p(x - y, p)).sum::<f64>() / na as f64;
    }
    // Walk both step functions on the common grid of multiples of 1/(na·nb).
    let (mut i, mut j, mut t, mut acc) = (0usize, 0usize, 0usize, 0.0);
    while i < na && j < nb {
        let ta = (i + 1) * nb;
        let tb = (j + 1) * na;
        let next = ta.min(tb);
        acc += (next - t) as f64 * pow_p(xs[i] - ys[j], p);
        t = next;
        if ta == next {
            i += 1;
        }
        if tb == next {
            j += 1;
        }
    }
    acc / (na * nb) as f64
}

/// Exact `W_p` between two 1-D samples (any sizes).
pub fn wasserstein_1d(xs: &[f64], ys: &[f64], p: u32) -> Result<f64> {
    check_order(p)?;
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(root_p(w1d_pow_sorted(&a, &b, p), p))
}

/// `L` unit directions drawn uniformly from the sphere in `dim` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDirections {
    dim: usize,
    data: Vec<f64>,
}

impl SliceDirections {
    pub fn random(dim: usize, count: usize, seed: u64) -> Result<Self> {
        if dim == 0 || count == 0 {
            return Err(Error::InvalidArgument("slice count and dimension must be positive".into()));
        }
        let mut r = rng(seed);
        let mut data = Vec::with_capacity(dim * count);
        for _ in 0..count {
            let mut d: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            d.iter_mut().for_each(|v| *v /= norm);
            data.extend(d);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Sorted projections of `cloud` onto each direction.
    pub fn sorted_projections(&self, cloud: &PointCloud) -> Vec<Vec<f64>> {
        self.iter()
            .map(|theta| {
                let mut s: Vec<f64> = cloud
                    .points()
                    .map(|x| x.iter().zip(theta).map(|(a, b)| a * b).sum())
                    .collect();
                s.sort_by(f64::total_cmp);
                s
            })
            .collect()
    }
}

/// Sliced distance from pre-sorted per-slice projections, accumulated in
/// slice order.
pub(crate) fn sliced_from_sorted(a: &[Vec<f64>], b: &[Vec<f64>], p: u32) -> f64 {
    let total: f64 = a.iter().zip(b).map(|(x, y)| w1d_pow_sorted(x, y, p)).sum();
    root_p(total / a.len() as f64, p)
}

/// Sliced `W_p`: `(mean over L directions of W_p^p of the 1-D projections)^(1/p)`.
pub fn wasserstein_sliced(a: &PointCloud, b: &PointCloud, p: u32, slices: usize, seed: u64) -> Result<f64> {
    check_order(p)?;
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let dirs = SliceDirections::random(a.dim(), slices, seed)?;
    Ok(sliced_from_sorted(&dirs.sorted_projections(a), &dirs.sorted_projections(b), p))
}
