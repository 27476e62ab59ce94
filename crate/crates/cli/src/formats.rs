//! Binary PGM/PPM rasters and MNIST-style IDX files.

use std::fs;
use std::path::Path;

use shiftguard_core::{Image, SampleSet};

use crate::io::write_atomic;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("unsupported magic `{0}`")]
    UnsupportedMagic(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("magic mismatch: expected {expected:#010x}, found {found:#010x}")]
    MagicMismatch { expected: u32, found: u32 },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] shiftguard_core::Error),
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Reads the next whitespace-delimited header token, skipping `#` comments.
fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], FormatError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(FormatError::MalformedHeader("header ends early".into()));
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, FormatError> {
    let t = token(bytes, pos)?;
    std::str::from_utf8(t)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| FormatError::MalformedHeader(format!("bad {what} `{}`", String::from_utf8_lossy(t))))
}

/// Decodes a binary "P5" (grayscale) or "P6" (RGB) raster.
pub fn parse_pnm(bytes: &[u8]) -> Result<Image, FormatError> {
    if bytes.len() < 2 {
        return Err(FormatError::MalformedHeader("missing magic".into()));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        other => return Err(FormatError::UnsupportedMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let mut pos = 2;
    if bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        return Err(FormatError::MalformedHeader("magic must be followed by whitespace".into()));
    }
    let width = number(bytes, &mut pos, "width")?;
    let height = number(bytes, &mut pos, "height")?;
    let maxval = number(bytes, &mut pos, "maxval")?;
    if !(1..=255).contains(&maxval) {
        return Err(FormatError::MalformedHeader(format!("maxval {maxval} outside 1..=255")));
    }
    if width == 0 || height == 0 {
        return Err(FormatError::MalformedHeader("zero dimension".into()));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(FormatError::MalformedHeader("missing separator before payload".into())),
    }
    let expected = width * height * channels;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    let m = maxval as f64;
    let data = payload[..expected].iter().map(|&b| (b as f64 / m).min(1.0)).collect();
    Ok(Image::new(width, height, channels, data)?)
}

pub fn encode_pnm(img: &Image) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| quantize(v)));
    out
}

pub fn load_raster(path: &Path) -> Result<Image, FormatError> {
    parse_pnm(&fs::read(path)?)
}

pub fn save_raster(path: &Path, img: &Image) -> Result<(), FormatError> {
    Ok(write_atomic(path, &encode_pnm(img))?)
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32, FormatError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(FormatError::Truncated {
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), FormatError> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(FormatError::MagicMismatch { expected, found });
    }
    Ok(())
}

/// Decodes an IDX image file into grayscale images.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Image>, FormatError> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let expected = 16 + n * size;
    if bytes.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if size == 0 && n > 0 {
        return Err(FormatError::MalformedHeader("zero image dimension".into()));
    }
    bytes[16..expected]
        .chunks_exact(size.max(1))
        .take(n)
        .map(|px| Ok(Image::new(cols, rows, 1, px.iter().map(|&b| b as f64 / 255.0).collect())?))
        .collect()
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u32>, FormatError> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let n = be_u32(bytes, 4)? as usize;
    let expected = 8 + n;
    if bytes.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[8..expected].iter().map(|&b| b as u32).collect())
}

/// Joins decoded images and labels into a labeled set.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<SampleSet, FormatError> {
    let images = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels)?;
    if images.len() != labels.len() {
        return Err(FormatError::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok(SampleSet::new(images, Some(labels))?)
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<SampleSet, FormatError> {
    parse_idx(&fs::read(images_path)?, &fs::read(labels_path)?)
}

/// Encodes a grayscale set as an IDX image file and, if labeled, a label
/// file. RGB images are converted to grayscale.
pub fn encode_idx(set: &SampleSet) -> (Vec<u8>, Option<Vec<u8>>) {
    let (w, h) = set.shape().map_or((0, 0), |(w, h, _)| (w, h));
    let mut images = Vec::with_capacity(16 + set.len() * w * h);
    for v in [IDX_IMAGES_MAGIC, set.len() as u32, h as u32, w as u32] {
        images.extend_from_slice(&v.to_be_bytes());
    }
    for img in set.images() {
        images.extend(shiftguard_core::image::to_grayscale(img).data().iter().map(|&v| quantize(v)));
    }
    let labels = set.labels().map(|ls| {
        let mut out = Vec::with_capacity(8 + ls.len());
        out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        out.extend_from_slice(&(ls.len() as u32).to_be_bytes());
        out.extend(ls.iter().map(|&l| l.min(255) as u8));
        out
    });
    (images, labels)
}

pub fn save_idx(images_path: &Path, labels_path: &Path, set: &SampleSet) -> Result<(), FormatError> {
    let (images, labels) = encode_idx(set);
    write_atomic(images_path, &images)?;
    if let Some(labels) = labels {
        write_atomic(labels_path, &labels)?;
    }
    Ok(())
}
