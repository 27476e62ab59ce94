//! Contrast-limited adaptive histogram equalization.
//!
//! The plane is split into a `tiles`×`tiles` grid. Each tile gets a 256-bin
//! histogram whose bins are clipped at `limit` times the uniform bin height,
//! with the clipped excess spread evenly over all bins. The tile's
//! cumulative histogram is its intensity mapping; pixels blend the mappings
//! of the four nearest tile centers bilinearly.

use alloc::vec::Vec;

const BINS: usize = 256;

#[inline]
fn bin_of(v: f64) -> usize {
    ((v * BINS as f64) as usize).min(BINS - 1)
}

pub fn clahe_plane(src: &[f64], w: usize, h: usize, tiles: usize, limit: f64) -> Vec<f64> {
    let ty_n = tiles.min(h).max(1);
    let tx_n = tiles.min(w).max(1);
    let bounds = |n: usize, t: usize, i: usize| (i * n / t, (i + 1) * n / t);

    let mut luts: Vec<[f64; BINS]> = Vec::with_capacity(ty_n * tx_n);
    for ty in 0..ty_n {
        let (y0, y1) = bounds(h, ty_n, ty);
        for tx in 0..tx_n {
            let (x0, x1) = bounds(w, tx_n, tx);
            let mut hist = [0.0f64; BINS];
            for y in y0..y1 {
                for &v in &src[y * w + x0..y * w + x1] {
                    hist[bin_of(v)] += 1.0;
                }
            }
            let count = ((y1 - y0) * (x1 - x0)) as f64;
            let clip = limit * count / BINS as f64;
            let mut excess = 0.0;
            for b in hist.iter_mut() {
                if *b > clip {
                    excess += *b - clip;
                    *b = clip;
                }
            }
            let share = excess / BINS as f64;
            let mut lut = [0.0; BINS];
            let mut acc = 0.0;
            for (l, b) in lut.iter_mut().zip(hist.iter()) {
                acc += b + share;
                *l = (acc / count).min(1.0);
            }
            luts.push(lut);
        }
    }

    // Continuous tile coordinate of a pixel center; tile centers sit at integers.
    let axis = |p: usize, n: usize, t: usize| -> (usize, usize, f64) {
        let f = (p as f64 + 0.5) * t as f64 / n as f64 - 0.5;
        if f <= 0.0 {
            (0, 0, 0.0)
        } else if f >= (t - 1) as f64 {
            (t - 1, t - 1, 0.0)
        } else {
            let i = f as usize;
            (i, i + 1, f - i as f64)
        }
    };

    let mut out = Vec::with_capacity(src.len());
    for y in 0..h {
        let (a0, a1, fy) = axis(y, h, ty_n);
        for x in 0..w {
            let (b0, b1, fx) = axis(x, w, tx_n);
            let bin = bin_of(src[y * w + x]);
            let m = |ty: usize, tx: usize| luts[ty * tx_n + tx][bin];
            let top = m(a0, b0) * (1.0 - fx) + m(a0, b1) * fx;
            let bottom = m(a1, b0) * (1.0 - fx) + m(a1, b1) * fx;
            out.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    out
}
