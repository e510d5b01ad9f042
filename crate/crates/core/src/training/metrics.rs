use std::fmt;
use std::path::Path;

use crate::error::{QdeqError, Result};

/// Which kind of optimizer steps an epoch consisted of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Warmup,
    Implicit,
    Direct,
    /// Warm-up ended inside this epoch.
    WarmupToImplicit,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Warmup => "warmup",
            Phase::Implicit => "implicit",
            Phase::Direct => "direct",
            Phase::WarmupToImplicit => "warmup+implicit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    pub phase: Phase,
    pub train_loss: f64,
    /// Percent, measured on the training passes themselves (dropout active).
    pub train_acc: f64,
    pub val_acc: f64,
    /// Mean relative residual on the validation set.
    pub mean_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub epochs: Vec<EpochMetrics>,
    pub test_acc: f64,
    pub test_residual: f64,
    pub wall_time_seconds: f64,
    /// Optimizer steps taken with the unrolled warm-up pass.
    pub warmup_steps: u64,
    /// All other optimizer steps.
    pub main_steps: u64,
    /// Steps the optimizer skipped for non-finite gradients.
    pub skipped_steps: u64,
    /// Batches in which at least one solve diverged.
    pub diverged_batches: u64,
}

pub const METRICS_HEADER: &str = "epoch,phase,train_loss,train_acc,val_acc,mean_residual";

impl RunMetrics {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(METRICS_HEADER);
        out.push('\n');
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{:.8e},{:.4},{:.4},{:.8e}\n",
                e.epoch, e.phase, e.train_loss, e.train_acc, e.val_acc, e.mean_residual
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| QdeqError::io(path, e))
    }
}
