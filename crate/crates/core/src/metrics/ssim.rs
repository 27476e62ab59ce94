//! Structural similarity on grayscale images: mean of local SSIM over 8×8
//! windows placed every 4 pixels, with `C1 = 0.01²` and `C2 = 0.03²` for a
//! unit dynamic range. Images smaller than the window use a single window
//! clipped to the image.

use crate::image::{to_grayscale, Image, SampleSet};
use crate::{Error, Result};

pub const WINDOW: usize = 8;
pub const STRIDE: usize = 4;
pub const C1: f64 = 0.01 * 0.01;
pub const C2: f64 = 0.03 * 0.03;

/// Window origins along an axis of length `n`; the last window is flush with
/// the far edge so every pixel is covered.
fn origins(n: usize, win: usize) -> impl Iterator<Item = usize> {
    let last = n - win;
    let regular = (0..=last).step_by(STRIDE);
    let tail = if last % STRIDE != 0 { Some(last) } else { None };
    regular.chain(tail)
}

pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::MixedShapes);
    }
    let (ga, gb) = (to_grayscale(a), to_grayscale(b));
    let (w, h) = (a.width(), a.height());
    let (wx, wy) = (WINDOW.min(w), WINDOW.min(h));
    let (xa, xb) = (ga.data(), gb.data());
    let count = (wx * wy) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for y0 in origins(h, wy) {
        for x0 in origins(w, wx) {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for y in y0..y0 + wy {
                for x in x0..x0 + wx {
                    let (u, v) = (xa[y * w + x], xb[y * w + x]);
                    sa += u;
                    sb += v;
                    saa += u * u;
                    sbb += v * v;
                    sab += u * v;
                }
            }
            let (ma, mb) = (sa / count, sb / count);
            let va = (saa / count - ma * ma).max(0.0);
            let vb = (sbb / count - mb * mb).max(0.0);
            let cov = sab / count - ma * mb;
            total += ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Mean SSIM over index-paired images.
pub fn batch_ssim(a: &SampleSet, b: &SampleSet) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for (x, y) in a.images().iter().zip(b.images()) {
        total += ssim(x, y)?;
    }
    Ok(total / a.len() as f64)
}
