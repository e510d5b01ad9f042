//! CIFAR-10 binary batches: one label byte then 1024 red, 1024 green and
//! 1024 blue bytes per record.

use std::path::Path;

use super::ImageDataset;
use crate::error::{QdeqError, Result};

pub const RECORD_BYTES: usize = 3073;
const SIDE: usize = 32;
const PLANE: usize = SIDE * SIDE;

/// Grayscale images (`0.299 R + 0.587 G + 0.114 B`, scaled to `[0, 1]`).
pub fn parse_cifar(bytes: &[u8]) -> Result<ImageDataset> {
    if !bytes.len().is_multiple_of(RECORD_BYTES) {
        return Err(QdeqError::Length(format!(
            "CIFAR batch of {} bytes is not a multiple of {RECORD_BYTES}",
            bytes.len()
        )));
    }
    let mut images = Vec::with_capacity(bytes.len() / RECORD_BYTES);
    let mut labels = Vec::with_capacity(bytes.len() / RECORD_BYTES);
    for record in bytes.chunks(RECORD_BYTES) {
        let label = usize::from(record[0]);
        if label >= 10 {
            return Err(QdeqError::Format(format!("CIFAR label byte {label}")));
        }
        labels.push(label);
        let px = &record[1..];
        images.push(
            (0..PLANE)
                .map(|i| {
                    let (r, g, b) = (f64::from(px[i]), f64::from(px[PLANE + i]), f64::from(px[2 * PLANE + i]));
                    (0.299 * r + 0.587 * g + 0.114 * b) / 255.0
                })
                .collect(),
        );
    }
    ImageDataset::new(images, labels, SIDE, SIDE, 10)
}

pub fn load_cifar_binary(path: impl AsRef<Path>) -> Result<ImageDataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| QdeqError::io(path, e))?;
    parse_cifar(&bytes)
}
