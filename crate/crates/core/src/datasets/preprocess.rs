use rand::seq::SliceRandom;
use rand::Rng;

use super::ImageDataset;
use crate::error::{QdeqError, Result};

/// Mean over non-overlapping `side/out_side` windows of a square image.
pub fn avg_pool(image: &[f64], side: usize, out_side: usize) -> Result<Vec<f64>> {
    if image.len() != side * side {
        return Err(QdeqError::invalid(format!("{} pixels for a {side}x{side} image", image.len())));
    }
    if out_side == 0 || !side.is_multiple_of(out_side) {
        return Err(QdeqError::invalid(format!("cannot pool {side}x{side} down to {out_side}x{out_side}")));
    }
    let w = side / out_side;
    let area = (w * w) as f64;
    let mut out = vec![0.0; out_side * out_side];
    for (r, row) in image.chunks(side).enumerate() {
        for (c, &p) in row.iter().enumerate() {
            out[(r / w) * out_side + c / w] += p;
        }
    }
    out.iter_mut().for_each(|v| *v /= area);
    Ok(out)
}

/// Bilinear resize with corner-aligned sampling: output pixel `(i, j)` samples
/// the source at `(i (h-1)/(out_h-1), j (w-1)/(out_w-1))`.
pub fn resize_bilinear(image: &[f64], h: usize, w: usize, out_h: usize, out_w: usize) -> Result<Vec<f64>> {
    if image.len() != h * w || h == 0 || w == 0 || out_h == 0 || out_w == 0 {
        return Err(QdeqError::invalid(format!(
            "cannot resize {} pixels as {h}x{w} to {out_h}x{out_w}",
            image.len()
        )));
    }
    let coord = |i: usize, n_in: usize, n_out: usize| -> (usize, usize, f64) {
        if n_out == 1 || n_in == 1 {
            return (0, 0, 0.0);
        }
        let pos = i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64;
        let lo = (pos.floor() as usize).min(n_in - 1);
        let hi = (lo + 1).min(n_in - 1);
        (lo, hi, pos - lo as f64)
    };
    let mut out = Vec::with_capacity(out_h * out_w);
    for i in 0..out_h {
        let (r0, r1, fr) = coord(i, h, out_h);
        for j in 0..out_w {
            let (c0, c1, fc) = coord(j, w, out_w);
            let top = image[r0 * w + c0] * (1.0 - fc) + image[r0 * w + c1] * fc;
            let bottom = image[r1 * w + c0] * (1.0 - fc) + image[r1 * w + c1] * fc;
            out.push((top * (1.0 - fr) + bottom * fr).clamp(0.0, 1.0));
        }
    }
    Ok(out)
}

/// Keeps the samples whose label is in `keep`, relabelled by rank of the
/// original label (`{0, 3, 6, 9}` becomes `0..4`). Order is preserved.
pub fn filter_classes(dataset: &ImageDataset, keep: &[usize]) -> Result<ImageDataset> {
    if keep.is_empty() {
        return Err(QdeqError::invalid("class filter keeps nothing"));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (img, &label) in dataset.images.iter().zip(&dataset.labels) {
        if let Ok(rank) = sorted.binary_search(&label) {
            images.push(img.clone());
            labels.push(rank);
        }
    }
    ImageDataset::new(images, labels, dataset.height, dataset.width, sorted.len())
}

/// Seeded uniform shuffle followed by a prefix split into `(train, val)`.
pub fn split<R: Rng + ?Sized>(dataset: &ImageDataset, train_frac: f64, rng: &mut R) -> Result<(ImageDataset, ImageDataset)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(QdeqError::invalid(format!("train fraction {train_frac} outside (0, 1)")));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(rng);
    let cut = (dataset.len() as f64 * train_frac).round() as usize;
    Ok((dataset.select(&order[..cut]), dataset.select(&order[cut..])))
}

/// A uniformly drawn subset of `n` samples (all of them if `n` is larger),
/// kept in original order.
pub fn subsample<R: Rng + ?Sized>(dataset: &ImageDataset, n: usize, rng: &mut R) -> ImageDataset {
    if n >= dataset.len() {
        return dataset.clone();
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(rng);
    let mut chosen = order[..n].to_vec();
    chosen.sort_unstable();
    dataset.select(&chosen)
}
