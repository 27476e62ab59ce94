//! Single-level orthonormal 2-D Haar transform on one plane.
//!
//! Each 2×2 block `{a, b; c, d}` maps to
//! `LL = (a+b+c+d)/2`, `LH = (a−b+c−d)/2`, `HL = (a+b−c−d)/2`, `HH = (a−b−c+d)/2`.
//! Odd sides are padded by replicating the last row/column.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct HaarPlanes {
    /// Width/height of each coefficient plane (half the padded input).
    pub width: usize,
    pub height: usize,
    pub ll: Vec<f64>,
    pub lh: Vec<f64>,
    pub hl: Vec<f64>,
    pub hh: Vec<f64>,
}

impl HaarPlanes {
    pub fn details(&self) -> [&[f64]; 3] {
        [&self.lh, &self.hl, &self.hh]
    }

    pub fn details_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.lh, &mut self.hl, &mut self.hh]
    }

    /// All coefficients, LL first.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.ll
            .iter()
            .chain(&self.lh)
            .chain(&self.hl)
            .chain(&self.hh)
            .copied()
    }
}

/// Forward transform of a row-major `width`×`height` plane.
pub fn forward(plane: &[f64], width: usize, height: usize) -> HaarPlanes {
    assert_eq!(plane.len(), width * height);
    let w2 = width.div_ceil(2);
    let h2 = height.div_ceil(2);
    let at = |x: usize, y: usize| plane[y.min(height - 1) * width + x.min(width - 1)];
    let n = w2 * h2;
    let (mut ll, mut lh, mut hl, mut hh) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for by in 0..h2 {
        for bx in 0..w2 {
            let (x, y) = (2 * bx, 2 * by);
            let a = at(x, y);
            let b = at(x + 1, y);
            let c = at(x, y + 1);
            let d = at(x + 1, y + 1);
            ll.push((a + b + c + d) / 2.0);
            lh.push((a - b + c - d) / 2.0);
            hl.push((a + b - c - d) / 2.0);
            hh.push((a - b - c + d) / 2.0);
        }
    }
    HaarPlanes {
        width: w2,
        height: h2,
        ll,
        lh,
        hl,
        hh,
    }
}

/// Inverse transform, returning the padded `2w × 2h` plane.
pub fn inverse(planes: &HaarPlanes) -> Vec<f64> {
    let (w2, h2) = (planes.width, planes.height);
    let width = 2 * w2;
    let mut out = alloc::vec![0.0; width * 2 * h2];
    for by in 0..h2 {
        for bx in 0..w2 {
            let i = by * w2 + bx;
            let (s, h, v, d) = (planes.ll[i], planes.lh[i], planes.hl[i], planes.hh[i]);
            let (x, y) = (2 * bx, 2 * by);
            out[y * width + x] = (s + h + v + d) / 2.0;
            out[y * width + x + 1] = (s - h + v - d) / 2.0;
            out[(y + 1) * width + x] = (s + h - v - d) / 2.0;
            out[(y + 1) * width + x + 1] = (s - h - v + d) / 2.0;
        }
    }
    out
}

/// Inverse transform cropped back to the original `width`×`height`.
pub fn inverse_cropped(planes: &HaarPlanes, width: usize, height: usize) -> Vec<f64> {
    let full = inverse(planes);
    let fw = 2 * planes.width;
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        out.extend_from_slice(&full[y * fw..y * fw + width]);
    }
    out
}
