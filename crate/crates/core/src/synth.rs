//! Download-free shapes dataset: disks, squares, crosses and rings on a
//! mildly textured background.

use alloc::vec::Vec;

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::image::{Image, SampleSet};
use crate::rng::{rng, substream};
use crate::{Error, Result};

pub const MAX_CLASSES: usize = 4;
pub const MIN_SIDE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Disk,
    Square,
    Cross,
    Ring,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Disk, Shape::Square, Shape::Cross, Shape::Ring];

    /// Whether the offset `(dx, dy)` from the center lies inside the shape.
    fn contains(self, dx: f64, dy: f64, radius: f64, stroke: f64) -> bool {
        match self {
            Shape::Disk => dx * dx + dy * dy <= radius * radius,
            Shape::Square => dx.abs().max(dy.abs()) <= 0.85 * radius,
            Shape::Cross => {
                (dx.abs() <= stroke / 2.0 && dy.abs() <= radius)
                    || (dy.abs() <= stroke / 2.0 && dx.abs() <= radius)
            }
            Shape::Ring => {
                let d2 = dx * dx + dy * dy;
                d2 <= radius * radius && d2 >= (radius - stroke) * (radius - stroke)
            }
        }
    }
}

/// Generates `n` grayscale `side`×`side` images; the label is the shape class.
///
/// Labels are balanced (a shuffled round-robin over the classes) and every
/// image is drawn from its own seed stream, so the output is a pure function
/// of the arguments.
pub fn synth_dataset(n: usize, side: usize, classes: usize, seed: u64) -> Result<SampleSet> {
    if classes == 0 || classes > MAX_CLASSES {
        return Err(Error::InvalidArgument(alloc::format!(
            "classes must be in 1..={MAX_CLASSES}, got {classes}"
        )));
    }
    if side < MIN_SIDE {
        return Err(Error::InvalidArgument(alloc::format!(
            "side must be at least {MIN_SIDE}, got {side}"
        )));
    }
    let mut labels: Vec<u32> = (0..n).map(|i| (i % classes) as u32).collect();
    labels.shuffle(&mut rng(seed));
    let images = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| render(Shape::ALL[label as usize], side, seed, i as u64))
        .collect();
    SampleSet::new(images, Some(labels))
}

fn render(shape: Shape, side: usize, seed: u64, index: u64) -> Image {
    let mut r = substream(seed, index.wrapping_add(1));
    let s = side as f64;
    let radius = s * r.random_range(0.26..0.36);
    let stroke = radius * r.random_range(0.42..0.52);
    let cx = s / 2.0 + s * r.random_range(-0.1..0.1);
    let cy = s / 2.0 + s * r.random_range(-0.1..0.1);
    let fg = r.random_range(0.6..0.9);
    let bg = r.random_range(0.08..0.3);
    let amp = r.random_range(0.01..0.04);
    let freq_x = r.random_range(0.1..0.5);
    let freq_y = r.random_range(0.1..0.5);
    let phase = r.random_range(0.0..core::f64::consts::TAU);

    const SUB: usize = 4;
    let mut data = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let mut inside = 0usize;
            for sy in 0..SUB {
                for sx in 0..SUB {
                    let px = x as f64 + (sx as f64 + 0.5) / SUB as f64;
                    let py = y as f64 + (sy as f64 + 0.5) / SUB as f64;
                    if shape.contains(px - cx, py - cy, radius, stroke) {
                        inside += 1;
                    }
                }
            }
            let cover = inside as f64 / (SUB * SUB) as f64;
            let texture = amp * (freq_x * x as f64 + freq_y * y as f64 + phase).sin()
                + r.random_range(-0.03..0.03);
            data.push(bg + (fg - bg) * cover + texture);
        }
    }
    Image::from_clipped(side, side, 1, data).expect("square gray image")
}
