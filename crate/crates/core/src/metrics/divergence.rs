//! Histogram-based divergences between 1-D samples: total variation, KL
//! (nats) and Jensen–Shannon (bits). Both samples are binned over their joint
//! min–max range and every bin gets `1e-9` added before normalization so KL
//! stays finite.

use alloc::vec::Vec;

use num_traits::Float;

use super::wasserstein::SliceDirections;
use super::PointCloud;
use crate::{Error, Result};

pub const SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divergence {
    TotalVariation,
    KullbackLeibler,
    JensenShannon,
}

impl Divergence {
    pub fn name(self) -> &'static str {
        match self {
            Self::TotalVariation => "tv",
            Self::KullbackLeibler => "kl",
            Self::JensenShannon => "js",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::TotalVariation, Self::KullbackLeibler, Self::JensenShannon]
            .into_iter()
            .find(|d| d.name() == name)
    }
}

fn histograms(xs: &[f64], ys: &[f64], bins: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let lo = xs.iter().chain(ys).cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().chain(ys).cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return None;
    }
    let scale = bins as f64 / (hi - lo);
    let hist = |v: &[f64]| {
        let mut h = alloc::vec![SMOOTHING; bins];
        for &x in v {
            h[(((x - lo) * scale) as usize).min(bins - 1)] += 1.0;
        }
        let total: f64 = h.iter().sum();
        h.iter_mut().for_each(|c| *c /= total);
        h
    };
    Some((hist(xs), hist(ys)))
}

fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * (a / b).ln()).sum()
}

fn divergence_1d(xs: &[f64], ys: &[f64], kind: Divergence, bins: usize) -> f64 {
    let Some((p, q)) = histograms(xs, ys, bins) else {
        return 0.0;
    };
    match kind {
        Divergence::TotalVariation => 0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>(),
        Divergence::KullbackLeibler => kl(&p, &q).max(0.0),
        Divergence::JensenShannon => {
            let m: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
            ((0.5 * kl(&p, &m) + 0.5 * kl(&q, &m)) / core::f64::consts::LN_2).clamp(0.0, 1.0)
        }
    }
}

fn check(a: &PointCloud, b: &PointCloud, bins: usize) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if bins < 2 {
        return Err(Error::InvalidArgument("at least two bins are needed".into()));
    }
    Ok(())
}

/// Divergence of `a` from `b`. Multi-dimensional clouds are compared
/// coordinate by coordinate and the results averaged.
pub fn histogram_divergence(a: &PointCloud, b: &PointCloud, kind: Divergence, bins: usize) -> Result<f64> {
    check(a, b, bins)?;
    let d = a.dim();
    let mut total = 0.0;
    for j in 0..d {
        let xs: Vec<f64> = a.points().map(|p| p[j]).collect();
        let ys: Vec<f64> = b.points().map(|p| p[j]).collect();
        total += divergence_1d(&xs, &ys, kind, bins);
    }
    Ok(total / d as f64)
}

/// Mean 1-D divergence over `slices` random unit directions.
pub fn sliced_divergence(
    a: &PointCloud,
    b: &PointCloud,
    kind: Divergence,
    bins: usize,
    slices: usize,
    seed: u64,
) -> Result<f64> {
    check(a, b, bins)?;
    let dirs = SliceDirections::random(a.dim(), slices, seed)?;
    let pa = dirs.sorted_projections(a);
    let pb = dirs.sorted_projections(b);
    let total: f64 = pa.iter().zip(&pb).map(|(x, y)| divergence_1d(x, y, kind, bins)).sum();
    Ok(total / slices as f64)
}
