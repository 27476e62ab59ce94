//! Raster images with unit-interval intensities and labeled batches of them.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Luma weights (ITU-R BT.601).
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Row-major, channel-interleaved image with every intensity in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Channels(channels));
        }
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch {
                width,
                height,
                channels,
                len: data.len(),
            });
        }
        if let Some(&bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::IntensityOutOfRange(bad));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, alloc::vec![value; width * height * channels])
    }

    /// Builds an image from arbitrary reals, clipping into `[0, 1]`. NaN maps to 0.
    pub fn from_clipped(width: usize, height: usize, channels: usize, mut data: Vec<f64>) -> Result<Self> {
        for v in &mut data {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Extracts channel `c` as a contiguous row-major plane.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.channels).copied().collect()
    }

    /// Rebuilds an image of the same shape from per-channel planes, clipping.
    pub(crate) fn from_planes_like(&self, planes: &[Vec<f64>]) -> Image {
        debug_assert_eq!(planes.len(), self.channels);
        let mut data = alloc::vec![0.0; self.data.len()];
        for (c, plane) in planes.iter().enumerate() {
            for (i, v) in plane.iter().enumerate() {
                data[i * self.channels + c] = *v;
            }
        }
        Image::from_clipped(self.width, self.height, self.channels, data)
            .expect("shape preserved by construction")
    }

    /// Applies `f` to every intensity, clipping the result.
    pub(crate) fn map_clipped(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        let data = self.data.iter().map(|&v| f(v)).collect();
        Image::from_clipped(self.width, self.height, self.channels, data)
            .expect("shape preserved by construction")
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

/// Luma conversion; identity for single-channel input.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels == 1 {
        return img.clone();
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|px| LUMA[0] * px[0] + LUMA[1] * px[1] + LUMA[2] * px[2])
        .collect();
    Image::from_clipped(img.width, img.height, 1, data).expect("valid gray shape")
}

/// Ordered batch of same-shaped images with optional class labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    images: Vec<Image>,
    labels: Option<Vec<u32>>,
}

impl SampleSet {
    pub fn new(images: Vec<Image>, labels: Option<Vec<u32>>) -> Result<Self> {
        if let Some(first) = images.first() {
            if images.iter().any(|im| !im.same_shape(first)) {
                return Err(Error::MixedShapes);
            }
        }
        if let Some(l) = &labels {
            if l.len() != images.len() {
                return Err(Error::LabelCount {
                    images: images.len(),
                    labels: l.len(),
                });
            }
        }
        Ok(Self { images, labels })
    }

    pub fn unlabeled(images: Vec<Image>) -> Result<Self> {
        Self::new(images, None)
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `(width, height, channels)` of the members, `None` when empty.
    pub fn shape(&self) -> Option<(usize, usize, usize)> {
        self.images.first().map(|im| (im.width, im.height, im.channels))
    }

    /// Sub-batch at `indices` (in that order), labels carried along.
    pub fn select(&self, indices: &[usize]) -> SampleSet {
        SampleSet {
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Contiguous sub-batch `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> SampleSet {
        SampleSet {
            images: self.images[start..end].to_vec(),
            labels: self.labels.as_ref().map(|l| l[start..end].to_vec()),
        }
    }

    /// Same labels, images replaced one for one.
    pub fn with_images(&self, images: Vec<Image>) -> Result<SampleSet> {
        SampleSet::new(images, self.labels.clone())
    }

    pub fn into_parts(self) -> (Vec<Image>, Option<Vec<u32>>) {
        (self.images, self.labels)
    }
}
