//! Depth-`L` networks with independent parameters rewritten as one
//! input-injected weight-tied layer.
//!
//! The stacked latent holds one block per depth. Block 1 only sees the input
//! (the `E_x` injection), block `i + 1` reads block `i` through layer `i + 1`
//! (the lower-shift `E_z`), and every block is read out the same way. After
//! `L` weight-tied iterations from zero the blocks are exactly the
//! intermediate outputs of the sequential network.

use super::layer::{DeqLayer, LayerVjp};
use crate::error::{QdeqError, Result};
use crate::qmodel::QuantumModel;

/// Weight-tied block operator over `L` layers of common dimension `n`.
pub struct StackedLayer<'a, L> {
    layers: &'a [L],
    n: usize,
}

impl<'a, L: DeqLayer> StackedLayer<'a, L> {
    pub fn new(layers: &'a [L]) -> Result<Self> {
        let n = layers
            .first()
            .ok_or_else(|| QdeqError::invalid("stack needs at least one layer"))?
            .dim();
        if layers.iter().any(|l| l.dim() != n) {
            return Err(QdeqError::invalid("stacked layers differ in dimension"));
        }
        Ok(Self { layers, n })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Splits a stacked latent into its blocks.
    pub fn blocks<'z>(&self, stacked: &'z [f64]) -> Vec<&'z [f64]> {
        stacked.chunks(self.n).collect()
    }
}

impl<L: DeqLayer> DeqLayer for StackedLayer<'_, L> {
    fn dim(&self) -> usize {
        self.n * self.layers.len()
    }

    fn num_params(&self) -> usize {
        self.layers.iter().map(DeqLayer::num_params).sum()
    }

    /// `x` is the input of a single layer (length `n`).
    fn forward(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!("stacked latent of length {} (expected {})", z.len(), self.dim()),
            });
        }
        let zero = vec![0.0; self.n];
        let mut out = Vec::with_capacity(self.dim());
        for (i, layer) in self.layers.iter().enumerate() {
            let prev = if i == 0 { &zero[..] } else { &z[(i - 1) * self.n..i * self.n] };
            out.extend(layer.forward(prev, x)?);
        }
        Ok(out)
    }

    fn vjp(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<LayerVjp> {
        let zero = vec![0.0; self.n];
        let mut dz = vec![0.0; self.dim()];
        let mut dtheta = Vec::with_capacity(self.num_params());
        for (i, layer) in self.layers.iter().enumerate() {
            let prev = if i == 0 { &zero[..] } else { &z[(i - 1) * self.n..i * self.n] };
            let v = layer.vjp(prev, x, &cotangent[i * self.n..(i + 1) * self.n])?;
            if i > 0 {
                dz[(i - 1) * self.n..i * self.n].copy_from_slice(&v.dz);
            }
            dtheta.extend(v.dtheta);
        }
        Ok(LayerVjp { dz, dtheta })
    }
}

/// `(x, z_1, ..., z_L)` with `z_0 = 0` and `z_{i+1} = f_{i+1}(z_i; x)`.
pub fn sequential_evaluation<L: DeqLayer>(layers: &[L], x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![x.to_vec()];
    let mut z = vec![0.0; x.len()];
    for layer in layers {
        z = layer.forward(&z, x)?;
        out.push(z.clone());
    }
    Ok(out)
}

/// Iterates the stacked weight-tied operator `L` times from zero and returns
/// `(x, z_1, ..., z_L)`.
///
/// Every model must match the first in everything but its parameters.
pub fn universality_stack(models: &[QuantumModel], x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let first = models
        .first()
        .ok_or_else(|| QdeqError::invalid("stack needs at least one model"))?;
    for (i, m) in models.iter().enumerate().skip(1) {
        let same = m.encoding() == first.encoding()
            && m.circuit() == first.circuit()
            && m.ensemble() == first.ensemble()
            && m.upsample() == first.upsample()
            && m.injection() == first.injection();
        if !same {
            return Err(QdeqError::invalid(format!("model {i} differs in shape from model 0")));
        }
    }
    let stacked = StackedLayer::new(models)?;
    let mut z = vec![0.0; stacked.dim()];
    for _ in 0..stacked.depth() {
        z = stacked.forward(&z, x)?;
    }
    let mut out = vec![x.to_vec()];
    out.extend(stacked.blocks(&z).into_iter().map(<[f64]>::to_vec));
    Ok(out)
}
