use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datasets::DatasetName;
use crate::deqsolve::{BroydenConfig, SolverMode};
use crate::encoding::EncodingKind;
use crate::error::{QdeqError, Result};
use crate::measurement::UpsampleScale;
use crate::qmodel::ModelPreset;

/// Every hyperparameter of a run. Parsed from JSON; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub dataset: DatasetName,
    pub encoding: EncodingKind,
    pub solver_mode: SolverMode,
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub warmup_steps: usize,
    #[serde(default = "one")]
    pub warmup_depth: usize,
    #[serde(default)]
    pub jac_loss_weight: f64,
    #[serde(default)]
    pub jac_loss_freq: f64,
    #[serde(default = "one")]
    pub jac_probes: usize,
    #[serde(default = "default_dropout")]
    pub dropout_p: f64,
    pub seed: u64,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
    /// Gates in the random layer of every 4-qubit block.
    #[serde(default = "default_random_ops")]
    pub random_ops: usize,
    #[serde(default)]
    pub upsample_scale: UpsampleScale,
    #[serde(default = "default_broyden_steps")]
    pub broyden_max_steps: usize,
    #[serde(default = "default_broyden_tol")]
    pub broyden_abs_tol: f64,
    /// Rescales the full gradient to at most this 2-norm before each step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_clip_norm: Option<f64>,
    /// Cap on samples taken from the training file (before the 80/20 split).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_subset: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_subset: Option<usize>,
}

fn default_batch_size() -> usize {
    256
}
fn one() -> usize {
    1
}
fn default_dropout() -> f64 {
    0.1
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_random_ops() -> usize {
    50
}
fn default_broyden_steps() -> usize {
    10
}
fn default_broyden_tol() -> f64 {
    1e-6
}

impl TrainConfig {
    /// Tuned hyperparameters for `dataset` under `mode`.
    ///
    /// `ImplicitWarmup` takes the tuned warm-up and Jacobian settings as is,
    /// `Implicit` keeps the Jacobian settings without warm-up and `Direct`
    /// drops both.
    pub fn preset(dataset: DatasetName, encoding: EncodingKind, solver_mode: SolverMode) -> Self {
        let (learning_rate, warmup_steps, jac_loss_weight, jac_loss_freq, epochs) = match dataset {
            DatasetName::Mnist4 => (0.05, 1875, 0.0, 0.0, 100),
            DatasetName::Mnist10 => (0.05, 1875, 0.8, 1.0, 100),
            DatasetName::FashionMnist10 => (0.05, 1875, 0.8, 0.8, 100),
            DatasetName::Cifar10 => (0.01, 2350, 0.8, 1.0, 25),
        };
        let (warmup_steps, jac_loss_weight, jac_loss_freq) = match solver_mode {
            SolverMode::ImplicitWarmup => (warmup_steps, jac_loss_weight, jac_loss_freq),
            SolverMode::Implicit => (0, jac_loss_weight, jac_loss_freq),
            SolverMode::Direct(_) => (0, 0.0, 0.0),
        };
        Self {
            dataset,
            encoding,
            solver_mode,
            learning_rate,
            epochs,
            batch_size: default_batch_size(),
            warmup_steps,
            warmup_depth: 1,
            jac_loss_weight,
            jac_loss_freq,
            jac_probes: 1,
            dropout_p: default_dropout(),
            seed: 0,
            adam_beta1: default_beta1(),
            adam_beta2: default_beta2(),
            adam_eps: default_eps(),
            random_ops: default_random_ops(),
            upsample_scale: UpsampleScale::Isometric,
            broyden_max_steps: default_broyden_steps(),
            broyden_abs_tol: default_broyden_tol(),
            grad_clip_norm: None,
            train_subset: None,
            test_subset: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(QdeqError::Config(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1".into());
        }
        if self.warmup_depth == 0 {
            return fail("warmup_depth must be at least 1".into());
        }
        if let SolverMode::Direct(0) = self.solver_mode {
            return fail("direct depth must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.jac_loss_freq) {
            return fail(format!("jac_loss_freq must lie in [0, 1], got {}", self.jac_loss_freq));
        }
        if !(self.jac_loss_weight >= 0.0 && self.jac_loss_weight.is_finite()) {
            return fail(format!("jac_loss_weight must be non-negative, got {}", self.jac_loss_weight));
        }
        if self.jac_probes == 0 {
            return fail("jac_probes must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return fail(format!("dropout_p must lie in [0, 1), got {}", self.dropout_p));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) || !(self.adam_eps > 0.0) {
            return fail("Adam betas must lie in [0, 1) and eps must be positive".into());
        }
        if self.encoding == EncodingKind::Angle && self.dataset != DatasetName::Mnist4 {
            return fail(format!("angle encoding is only defined for mnist4, not {}", self.dataset));
        }
        if let Some(c) = self.grad_clip_norm {
            if !(c > 0.0 && c.is_finite()) {
                return fail(format!("grad_clip_norm must be positive, got {c}"));
            }
        }
        if self.train_subset == Some(0) || self.test_subset == Some(0) {
            return fail("subset sizes must be positive".into());
        }
        self.broyden().validate().map_err(|e| QdeqError::Config(e.to_string()))
    }

    pub fn broyden(&self) -> BroydenConfig {
        BroydenConfig::new(self.broyden_max_steps, self.broyden_abs_tol)
    }

    pub fn model_preset(&self) -> ModelPreset {
        match (self.dataset, self.encoding) {
            (DatasetName::Mnist4, EncodingKind::Amplitude) => ModelPreset::Mnist4Amplitude,
            (DatasetName::Mnist4, EncodingKind::Angle) => ModelPreset::Mnist4Angle,
            _ => ModelPreset::TenClass,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| QdeqError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| QdeqError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let c = TrainConfig::preset(DatasetName::Mnist4, EncodingKind::Amplitude, SolverMode::ImplicitWarmup);
        assert_eq!(
            (c.learning_rate, c.warmup_steps, c.warmup_depth, c.jac_loss_weight, c.jac_loss_freq),
            (0.05, 1875, 1, 0.0, 0.0)
        );
        let c = TrainConfig::preset(DatasetName::Cifar10, EncodingKind::Amplitude, SolverMode::ImplicitWarmup);
        assert_eq!((c.learning_rate, c.warmup_steps, c.epochs), (0.01, 2350, 25));
        let c = TrainConfig::preset(DatasetName::FashionMnist10, EncodingKind::Amplitude, SolverMode::ImplicitWarmup);
        assert_eq!((c.jac_loss_weight, c.jac_loss_freq), (0.8, 0.8));
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let c = TrainConfig::preset(DatasetName::Mnist10, EncodingKind::Amplitude, SolverMode::Direct(5));
        let text = c.to_json();
        assert!(text.contains("\"direct\": 5"));
        assert_eq!(TrainConfig::from_json(&text).unwrap(), c);
        let bad = text.replacen("\"epochs\"", "\"epoch_count\"", 1);
        assert!(matches!(TrainConfig::from_json(&bad), Err(QdeqError::Config(_))));
    }

    #[test]
    fn invariants_enforced() {
        let mut c = TrainConfig::preset(DatasetName::Mnist4, EncodingKind::Angle, SolverMode::Implicit);
        c.validate().unwrap();
        c.dropout_p = 1.0;
        assert!(c.validate().is_err());
        c.dropout_p = 0.1;
        c.jac_loss_freq = 1.5;
        assert!(c.validate().is_err());
        let c = TrainConfig::preset(DatasetName::Mnist10, EncodingKind::Angle, SolverMode::Implicit);
        assert!(c.validate().is_err());
    }
}
