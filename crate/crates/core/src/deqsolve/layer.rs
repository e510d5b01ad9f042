use crate::error::{QdeqError, Result};

/// Cotangent of a layer evaluation pulled back to its latent input and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerVjp {
    pub dz: Vec<f64>,
    pub dtheta: Vec<f64>,
}

/// An input-injected map `f(z; x)` with trainable parameters.
///
/// Implemented by the quantum model and by synthetic layers in tests. Must be
/// callable from several threads at once.
pub trait DeqLayer: Sync {
    /// Length of `z` and `x`.
    fn dim(&self) -> usize;

    fn num_params(&self) -> usize;

    fn forward(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>>;

    /// `cotangent^T df/dz` and `cotangent^T df/dtheta`.
    fn vjp(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<LayerVjp>;

    fn vjp_z(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
        Ok(self.vjp(z, x, cotangent)?.dz)
    }

    fn grad_theta(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<Vec<f64>> {
        Ok(self.vjp(z, x, cotangent)?.dtheta)
    }
}

/// `f(z; x) = A z + B theta + x` with row-major `A` (`n x n`) and `B` (`n x p`).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineLayer {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub theta: Vec<f64>,
}

impl AffineLayer {
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if a.len() != n * n || b.len() != n * theta.len() {
            return Err(QdeqError::invalid("affine layer matrix shapes do not match"));
        }
        Ok(Self { n, a, b, theta })
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!("vector of length {} for an affine layer of size {}", v.len(), self.n),
            });
        }
        Ok(())
    }
}

impl DeqLayer for AffineLayer {
    fn dim(&self) -> usize {
        self.n
    }

    fn num_params(&self) -> usize {
        self.theta.len()
    }

    fn forward(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        self.check(x)?;
        let p = self.theta.len();
        Ok((0..self.n)
            .map(|i| {
                let az: f64 = (0..self.n).map(|j| self.a[i * self.n + j] * z[j]).sum();
                let bt: f64 = (0..p).map(|j| self.b[i * p + j] * self.theta[j]).sum();
                az + bt + x[i]
            })
            .collect())
    }

    fn vjp(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<LayerVjp> {
        self.check(z)?;
        self.check(x)?;
        self.check(cotangent)?;
        let p = self.theta.len();
        let dz = (0..self.n)
            .map(|j| (0..self.n).map(|i| self.a[i * self.n + j] * cotangent[i]).sum())
            .collect();
        let dtheta = (0..p)
            .map(|j| (0..self.n).map(|i| self.b[i * p + j] * cotangent[i]).sum())
            .collect();
        Ok(LayerVjp { dz, dtheta })
    }
}
