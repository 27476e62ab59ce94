//! Neighborhood filters on a single row-major plane. Borders replicate the
//! nearest edge pixel.

use alloc::vec::Vec;

use num_traits::Float;

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Median over a `k`×`k` window. For even `k` the window spans offsets
/// `-k/2 ..= k/2 - 1` and the two middle values are averaged.
pub fn median_plane(src: &[f64], w: usize, h: usize, k: usize) -> Vec<f64> {
    let lo = (k / 2) as isize;
    let hi = (k - 1) as isize - lo;
    let mut window = Vec::with_capacity(k * k);
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h as isize {
        for x in 0..w as isize {
            window.clear();
            for dy in -lo..=hi {
                let row = clamp_index(y + dy, h) * w;
                for dx in -lo..=hi {
                    window.push(src[row + clamp_index(x + dx, w)]);
                }
            }
            let mid = window.len() / 2;
            let (lower, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
            let m = *m;
            if k % 2 == 0 {
                let below = lower.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                out.push(0.5 * (below + m));
            } else {
                out.push(m);
            }
        }
    }
    out
}

/// Separable Gaussian smoothing with a kernel of radius `ceil(3σ)`.
pub fn gaussian_plane(src: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let mut tmp = alloc::vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w as isize {
            tmp[y * w + x as usize] = kernel
                .iter()
                .zip(-radius..=radius)
                .map(|(k, d)| k * src[y * w + clamp_index(x + d, w)])
                .sum();
        }
    }
    let mut out = alloc::vec![0.0; src.len()];
    for y in 0..h as isize {
        for x in 0..w {
            out[y as usize * w + x] = kernel
                .iter()
                .zip(-radius..=radius)
                .map(|(k, d)| k * tmp[clamp_index(y + d, h) * w + x])
                .sum();
        }
    }
    out
}

/// Edge-preserving bilateral filter over a `(2r+1)²` window.
pub fn bilateral_plane(src: &[f64], w: usize, h: usize, radius: usize, sigma_s: f64, sigma_r: f64) -> Vec<f64> {
    let r = radius as isize;
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_s * sigma_s)).exp())
        .collect();
    let range_scale = -1.0 / (2.0 * sigma_r * sigma_r);
    let mut out = Vec::with_capacity(src.len());
    for y in 0..h as isize {
        for x in 0..w as isize {
            let center = src[y as usize * w + x as usize];
            let (mut acc, mut norm) = (0.0, 0.0);
            let mut i = 0;
            for dy in -r..=r {
                let row = clamp_index(y + dy, h) * w;
                for dx in -r..=r {
                    let v = src[row + clamp_index(x + dx, w)];
                    let wgt = spatial[i] * ((v - center) * (v - center) * range_scale).exp();
                    acc += wgt * v;
                    norm += wgt;
                    i += 1;
                }
            }
            out.push(acc / norm);
        }
    }
    out
}
