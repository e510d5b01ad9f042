use rand::Rng;

use crate::error::{QdeqError, Result};

/// Affine classifier on the equilibrium with mask dropout on its input.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierHead {
    pub num_classes: usize,
    pub dim: usize,
    /// Row-major `num_classes x dim`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    pub dropout_p: f64,
}

/// Gradients of a scalar loss through [`ClassifierHead::forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeadGrad {
    pub dweight: Vec<f64>,
    pub dbias: Vec<f64>,
    /// With respect to the unmasked input.
    pub dz: Vec<f64>,
}

impl ClassifierHead {
    /// Weights uniform in `+-1/sqrt(dim)`, zero bias.
    pub fn init<R: Rng + ?Sized>(num_classes: usize, dim: usize, dropout_p: f64, rng: &mut R) -> Result<Self> {
        if !(0.0..1.0).contains(&dropout_p) {
            return Err(QdeqError::invalid(format!("dropout probability {dropout_p} outside [0, 1)")));
        }
        let bound = 1.0 / (dim as f64).sqrt();
        Ok(Self {
            num_classes,
            dim,
            weight: (0..num_classes * dim).map(|_| rng.random_range(-bound..bound)).collect(),
            bias: vec![0.0; num_classes],
            dropout_p,
        })
    }

    pub fn num_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// One dropout mask: `0` with probability `p`, else `1/(1-p)`.
    pub fn draw_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let keep = 1.0 / (1.0 - self.dropout_p);
        (0..self.dim)
            .map(|_| if rng.random::<f64>() < self.dropout_p { 0.0 } else { keep })
            .collect()
    }

    fn apply(&self, z: &[f64], mask: Option<&[f64]>) -> Vec<f64> {
        (0..self.num_classes)
            .map(|c| {
                let row = &self.weight[c * self.dim..(c + 1) * self.dim];
                let dot: f64 = match mask {
                    Some(m) => row.iter().zip(z).zip(m).map(|((w, zi), mi)| w * zi * mi).sum(),
                    None => row.iter().zip(z).map(|(w, zi)| w * zi).sum(),
                };
                dot + self.bias[c]
            })
            .collect()
    }

    /// Logits. In training mode one mask is drawn from `rng` and applied to `z`.
    pub fn forward<R: Rng + ?Sized>(&self, z: &[f64], train_mode: bool, rng: &mut R) -> Vec<f64> {
        if train_mode && self.dropout_p > 0.0 {
            let mask = self.draw_mask(rng);
            self.apply(z, Some(&mask))
        } else {
            self.apply(z, None)
        }
    }

    /// Logits with an explicit mask (`None` for evaluation).
    pub fn forward_masked(&self, z: &[f64], mask: Option<&[f64]>) -> Vec<f64> {
        self.apply(z, mask)
    }

    pub fn backward(&self, z: &[f64], mask: Option<&[f64]>, dlogits: &[f64]) -> HeadGrad {
        let masked: Vec<f64> = match mask {
            Some(m) => z.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => z.to_vec(),
        };
        let mut dweight = vec![0.0; self.weight.len()];
        let mut dz = vec![0.0; self.dim];
        for (c, &g) in dlogits.iter().enumerate() {
            let row = c * self.dim;
            for j in 0..self.dim {
                dweight[row + j] = g * masked[j];
                dz[j] += g * self.weight[row + j];
            }
        }
        if let Some(m) = mask {
            dz.iter_mut().zip(m).for_each(|(d, mi)| *d *= mi);
        }
        HeadGrad {
            dweight,
            dbias: dlogits.to_vec(),
            dz,
        }
    }
}
