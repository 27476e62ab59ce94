//! Single-level Haar wavelet denoising with soft thresholding of the detail
//! subbands. Noise level is estimated as `median(|HH|) / 0.6745`.

use alloc::vec::Vec;

use num_traits::Float;

use crate::haar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shrink {
    /// Per-subband threshold `σ² / σ_x`.
    Bayes,
    /// Universal threshold `σ √(2 ln N)`.
    Visu,
}

pub fn wavelet_denoise_plane(src: &[f64], w: usize, h: usize, rule: Shrink) -> Vec<f64> {
    let mut planes = haar::forward(src, w, h);
    let sigma = median_abs(&planes.hh) / 0.6745;
    if sigma > 0.0 {
        let n = (4 * planes.width * planes.height) as f64;
        for band in planes.details_mut() {
            let t = match rule {
                Shrink::Visu => sigma * (2.0 * n.ln()).sqrt(),
                Shrink::Bayes => bayes_threshold(band, sigma),
            };
            for c in band.iter_mut() {
                *c = soft(*c, t);
            }
        }
    }
    haar::inverse_cropped(&planes, w, h)
}

fn bayes_threshold(band: &[f64], sigma: f64) -> f64 {
    let var_y = band.iter().map(|c| c * c).sum::<f64>() / band.len() as f64;
    let sigma_x = (var_y - sigma * sigma).max(0.0).sqrt();
    if sigma_x == 0.0 {
        band.iter().fold(0.0, |m, c| m.max(c.abs()))
    } else {
        sigma * sigma / sigma_x
    }
}

fn soft(c: f64, t: f64) -> f64 {
    let mag = (c.abs() - t).max(0.0);
    if c < 0.0 {
        -mag
    } else {
        mag
    }
}

fn median_abs(xs: &[f64]) -> f64 {
    let mut a: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        a[n / 2]
    } else {
        (a[n / 2 - 1] + a[n / 2]) / 2.0
    }
}
