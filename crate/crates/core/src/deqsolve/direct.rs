use super::broyden::norm;
use super::layer::DeqLayer;
use crate::error::{QdeqError, Result};

/// Iterates `z_{i+1} = f(z_i; x)` of an explicit weight-tied unroll.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectTape {
    x: Vec<f64>,
    /// `z_0 = 0, z_1, ..., z_L`.
    states: Vec<Vec<f64>>,
}

/// `L` weight-tied applications of `layer` from `z_0 = 0`.
pub fn direct_unroll<L: DeqLayer + ?Sized>(layer: &L, x: &[f64], depth: usize) -> Result<DirectTape> {
    if depth == 0 {
        return Err(QdeqError::invalid("direct unroll needs depth >= 1"));
    }
    let mut states = Vec::with_capacity(depth + 1);
    states.push(vec![0.0; layer.dim()]);
    for i in 0..depth {
        let next = layer.forward(&states[i], x)?;
        states.push(next);
    }
    Ok(DirectTape { x: x.to_vec(), states })
}

impl DirectTape {
    pub fn depth(&self) -> usize {
        self.states.len() - 1
    }

    /// `z_L`.
    pub fn output(&self) -> &[f64] {
        self.states.last().expect("tape holds z_0")
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    /// `||z_L - z_{L-1}|| / (||z_L|| + 1e-9)` for `L >= 2`; for `L = 1` the
    /// residual `||f(z_1) - z_1|| / (||f(z_1)|| + 1e-9)` costs one more evaluation.
    pub fn residual<L: DeqLayer + ?Sized>(&self, layer: &L) -> Result<f64> {
        let (next, prev) = if self.depth() >= 2 {
            (self.output().to_vec(), &self.states[self.depth() - 1])
        } else {
            (layer.forward(self.output(), &self.x)?, &self.states[1])
        };
        let diff: Vec<f64> = next.iter().zip(prev).map(|(a, b)| a - b).collect();
        Ok(norm(&diff) / (norm(&next) + 1e-9))
    }

    /// Reverse accumulation of `cotangent^T dz_L/dtheta` through every layer.
    pub fn backward<L: DeqLayer + ?Sized>(&self, layer: &L, cotangent: &[f64]) -> Result<Vec<f64>> {
        let mut dtheta = vec![0.0; layer.num_params()];
        let mut cot = cotangent.to_vec();
        for i in (0..self.depth()).rev() {
            let v = layer.vjp(&self.states[i], &self.x, &cot)?;
            dtheta.iter_mut().zip(&v.dtheta).for_each(|(a, b)| *a += b);
            cot = v.dz;
        }
        Ok(dtheta)
    }
}
