//! The IDX container used by MNIST.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! images: u32 magic = 2051 | u32 count | u32 rows | u32 cols | count·rows·cols u8
//! labels: u32 magic = 2049 | u32 count | count u8
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const IMAGE_SIDE: usize = 28;

/// Raw unsigned-byte images, `count` rows of `rows·cols` pixels each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl RawImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let n = self.pixels_per_image();
        &self.pixels[i * n..(i + 1) * n]
    }
}

fn read_u32(bytes: &[u8], offset: usize, field: &'static str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(field, format!("file truncated at byte {offset}")))
}

fn check_payload(bytes: &[u8], header: usize, expected: usize) -> Result<()> {
    let got = bytes.len() - header;
    if got < expected {
        return Err(Error::format(
            "payload",
            format!("truncated: header declares {expected} bytes, found {got}"),
        ));
    }
    if got > expected {
        return Err(Error::format(
            "payload",
            format!("dimension mismatch: header declares {expected} bytes, found {got}"),
        ));
    }
    Ok(())
}

/// Parses an image file held in memory. Images must be 28×28.
pub fn parse_idx_images(bytes: &[u8]) -> Result<RawImages> {
    let magic = read_u32(bytes, 0, "magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::format(
            "magic",
            format!("expected {IMAGE_MAGIC} for images, found {magic}"),
        ));
    }
    let count = read_u32(bytes, 4, "count")? as usize;
    let rows = read_u32(bytes, 8, "rows")? as usize;
    let cols = read_u32(bytes, 12, "cols")? as usize;
    if rows != IMAGE_SIDE {
        return Err(Error::format("rows", format!("expected {IMAGE_SIDE}, found {rows}")));
    }
    if cols != IMAGE_SIDE {
        return Err(Error::format("cols", format!("expected {IMAGE_SIDE}, found {cols}")));
    }
    check_payload(bytes, 16, count * rows * cols)?;
    Ok(RawImages {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

/// Parses a label file held in memory. Every label must be at most 9.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32(bytes, 0, "magic")?;
    if magic != LABEL_MAGIC {
        return Err(Error::format(
            "magic",
            format!("expected {LABEL_MAGIC} for labels, found {magic}"),
        ));
    }
    let count = read_u32(bytes, 4, "count")? as usize;
    check_payload(bytes, 8, count)?;
    let labels = bytes[8..].to_vec();
    if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l > 9) {
        return Err(Error::format("label", format!("entry {i} is {l}, expected 0..=9")));
    }
    Ok(labels)
}

pub fn load_idx_images(path: impl AsRef<Path>) -> Result<RawImages> {
    parse_idx_images(&fs::read(path)?)
}

pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&fs::read(path)?)
}

pub fn encode_idx_images(images: &RawImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGE_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &RawImages) -> Result<()> {
    fs::write(path, encode_idx_images(images))?;
    Ok(())
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    fs::write(path, encode_idx_labels(labels))?;
    Ok(())
}
