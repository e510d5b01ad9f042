//! Fixed-point layers: Broyden forward solve, implicit and unrolled backward
//! passes, Jacobian regularization and the weight-tied stacking construction.

mod broyden;
mod direct;
mod implicit;
mod jacobian;
mod layer;
mod universality;

pub use broyden::{broyden_root, relative_residual, BroydenConfig, FixedPointResult};
pub use direct::{direct_unroll, DirectTape};
pub use implicit::{forward_fixed_point, implicit_backward, ImplicitGradient, EQUILIBRIUM_TOLERANCE};
pub use jacobian::{jacobian_frobenius_estimate, jacobian_penalty_grad};
pub use layer::{AffineLayer, DeqLayer, LayerVjp};
pub use universality::{sequential_evaluation, universality_stack, StackedLayer};

use serde::{Deserialize, Serialize};

/// How the equilibrium (or its stand-in) is computed during training and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Broyden forward, implicit backward from the start.
    Implicit,
    /// Unrolled warm-up for a number of optimizer steps, then implicit.
    ImplicitWarmup,
    /// `L` explicit weight-tied applications with ordinary backpropagation.
    Direct(usize),
}

impl std::fmt::Display for SolverMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverMode::Implicit => write!(f, "implicit"),
            SolverMode::ImplicitWarmup => write!(f, "implicit_warmup"),
            SolverMode::Direct(l) => write!(f, "direct{l}"),
        }
    }
}
