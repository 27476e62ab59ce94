//! The 3-d state representation: brightness, spread and entropy of the Haar
//! coefficients of the grayscale image, averaged over a batch.
//!
//! Brightness is the mean of the LL plane. Standard deviation (population)
//! and entropy are taken over all four planes; entropy is in bits over a
//! 256-bin histogram spanning the coefficients' own min–max range.

use alloc::vec::Vec;

use num_traits::Float;

use crate::haar::{self, HaarPlanes};
use crate::image::{to_grayscale, Image, SampleSet};
use crate::{Error, Result};

pub const ENTROPY_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub brightness: f64,
    pub std: f64,
    pub entropy: f64,
}

impl StateVector {
    pub const DIM: usize = 3;

    pub fn to_array(self) -> [f64; 3] {
        [self.brightness, self.std, self.entropy]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            brightness: a[0],
            std: a[1],
            entropy: a[2],
        }
    }

    /// Component by index: 0 brightness, 1 std, 2 entropy.
    pub fn get(&self, index: usize) -> f64 {
        self.to_array()[index]
    }
}

/// Haar DWT of the image's grayscale version.
pub fn haar_dwt(img: &Image) -> HaarPlanes {
    let gray = to_grayscale(img);
    haar::forward(gray.data(), gray.width(), gray.height())
}

pub fn image_features(img: &Image) -> StateVector {
    let planes = haar_dwt(img);
    let brightness = mean(&planes.ll);
    let coeffs: Vec<f64> = planes.coefficients().collect();
    let mu = mean(&coeffs);
    let var = coeffs.iter().map(|c| (c - mu) * (c - mu)).sum::<f64>() / coeffs.len() as f64;
    StateVector {
        brightness,
        std: var.sqrt(),
        entropy: histogram_entropy(&coeffs, ENTROPY_BINS),
    }
}

/// Mean of per-image features, accumulated in index order.
pub fn batch_state(batch: &SampleSet) -> Result<StateVector> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut acc = [0.0; 3];
    for img in batch.images() {
        for (a, v) in acc.iter_mut().zip(image_features(img).to_array()) {
            *a += v;
        }
    }
    let n = batch.len() as f64;
    Ok(StateVector::from_array(acc.map(|a| a / n)))
}

/// Per-image state vectors in batch order.
pub fn per_image_states(batch: &SampleSet) -> Vec<StateVector> {
    batch.images().iter().map(image_features).collect()
}

/// Shannon entropy in bits of a `bins`-bin histogram over the values' range.
/// A degenerate range has zero entropy.
pub fn histogram_entropy(values: &[f64], bins: usize) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() || !(hi > lo) {
        return 0.0;
    }
    let mut counts = alloc::vec![0usize; bins];
    let scale = bins as f64 / (hi - lo);
    for &v in values {
        let b = (((v - lo) * scale) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = values.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
