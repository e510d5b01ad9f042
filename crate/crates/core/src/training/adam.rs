use serde::{Deserialize, Serialize};

/// Adam with bias-corrected moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    #[serde(with = "super::checkpoint::sci_vec")]
    pub m: Vec<f64>,
    #[serde(with = "super::checkpoint::sci_vec")]
    pub v: Vec<f64>,
    /// Number of applied steps.
    pub t: u64,
    /// Steps skipped because of non-finite gradients.
    pub skipped: u64,
}

impl AdamState {
    pub fn new(num_params: usize) -> Self {
        Self {
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
            skipped: 0,
        }
    }

    /// Updates `params` in place. A gradient with any non-finite entry is
    /// skipped (counted, no state change); returns whether the step was applied.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], cfg: &AdamConfig) -> bool {
        assert_eq!(params.len(), grads.len(), "parameter and gradient lengths differ");
        assert_eq!(params.len(), self.m.len(), "optimizer state sized for other parameters");
        if grads.iter().any(|g| !g.is_finite()) {
            self.skipped += 1;
            return false;
        }
        self.t += 1;
        let t = self.t as f64;
        let c1 = 1.0 - cfg.beta1.powf(t);
        let c2 = 1.0 - cfg.beta2.powf(t);
        for i in 0..params.len() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * grads[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: AdamConfig = AdamConfig {
        learning_rate: 0.05,
        beta1: 0.9,
        beta2: 0.999,
        eps: 1e-8,
    };

    #[test]
    fn zero_gradient_keeps_params() {
        let mut p = vec![1.0, -2.0];
        let mut s = AdamState::new(2);
        s.step(&mut p, &[0.0, 0.0], &CFG);
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn first_step_has_magnitude_lr() {
        let mut p = vec![0.0, 0.0, 0.0];
        let mut s = AdamState::new(3);
        s.step(&mut p, &[3.0, -0.01, 1e3], &CFG);
        // m_hat = g, v_hat = g^2, so each update is lr * g / (|g| + eps).
        for (pi, g) in p.iter().zip([3.0f64, -0.01, 1e3]) {
            assert!((pi + CFG.learning_rate * g / (g.abs() + CFG.eps)).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_gradient_is_skipped() {
        let mut p = vec![1.0];
        let mut s = AdamState::new(1);
        assert!(!s.step(&mut p, &[f64::NAN], &CFG));
        assert_eq!((p[0], s.t, s.skipped), (1.0, 0, 1));
    }
}
