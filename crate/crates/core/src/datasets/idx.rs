//! Big-endian IDX files as distributed for MNIST and FashionMNIST.

use std::path::Path;

use super::ImageDataset;
use crate::error::{QdeqError, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| QdeqError::Length(format!("{what}: header truncated at byte {}", bytes.len())))
}

fn check_magic(bytes: &[u8], expected: u32, what: &str) -> Result<()> {
    let magic = be_u32(bytes, 0, what)?;
    if magic != expected {
        return Err(QdeqError::Format(format!(
            "{what}: magic 0x{magic:08x}, expected 0x{expected:08x}"
        )));
    }
    Ok(())
}

/// Images scaled to `[0, 1]`, with their height and width.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(Vec<Vec<f64>>, usize, usize)> {
    check_magic(bytes, IMAGE_MAGIC, "image file")?;
    let count = be_u32(bytes, 4, "image file")? as usize;
    let rows = be_u32(bytes, 8, "image file")? as usize;
    let cols = be_u32(bytes, 12, "image file")? as usize;
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() < count * size {
        return Err(QdeqError::Length(format!(
            "image file: {} pixel bytes for {count} images of {rows}x{cols}",
            body.len()
        )));
    }
    let images = body[..count * size]
        .chunks(size.max(1))
        .take(count)
        .map(|img| img.iter().map(|&p| f64::from(p) / 255.0).collect())
        .collect();
    Ok((images, rows, cols))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    check_magic(bytes, LABEL_MAGIC, "label file")?;
    let count = be_u32(bytes, 4, "label file")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(QdeqError::Length(format!(
            "label file: {} label bytes for {count} labels",
            body.len()
        )));
    }
    Ok(body[..count].iter().map(|&l| usize::from(l)).collect())
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<ImageDataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let image_bytes = std::fs::read(images_path).map_err(|e| QdeqError::io(images_path, e))?;
    let label_bytes = std::fs::read(labels_path).map_err(|e| QdeqError::io(labels_path, e))?;
    let (images, rows, cols) = parse_idx_images(&image_bytes)?;
    let labels = parse_idx_labels(&label_bytes)?;
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    ImageDataset::new(images, labels, rows, cols, num_classes)
}

#[cfg(test)]
pub(crate) fn idx_fixture(magic: u32, dims: &[u32], body: &[u8]) -> Vec<u8> {
    let mut out = magic.to_be_bytes().to_vec();
    for d in dims {
        out.extend(d.to_be_bytes());
    }
    out.extend(body);
    out
}
