//! Classifier head, loss, optimizer and the train/evaluate loops.

mod adam;
mod checkpoint;
mod config;
mod head;
mod loss;
mod metrics;
mod trainer;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use config::TrainConfig;
pub use head::{ClassifierHead, HeadGrad};
pub use loss::{argmax, cross_entropy};
pub use metrics::{EpochMetrics, Phase, RunMetrics, METRICS_HEADER};
pub use trainer::{
    build_model, evaluate, train, BatchGradient, EvalResult, Pass, TrainOutcome, Trainer, CONVERGED_RESIDUAL,
    JAC_FD_STEP,
};

#[cfg(test)]
mod tests;
