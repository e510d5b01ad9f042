//! Deep equilibrium models whose layer is a parametrized quantum circuit.
//!
//! A layer encodes its latent `z` plus the input `x` into a statevector, runs
//! a circuit and reads out expectation values, giving `f(z; x)`. Training
//! finds `z* = f(z*; x)` with Broyden's method and differentiates through the
//! fixed point implicitly, or unrolls a few iterations directly.
//!
//! - [`simcore`]: statevector simulation and circuit gradients.
//! - [`encoding`], [`measurement`], [`qmodel`]: the quantum layer.
//! - [`deqsolve`]: fixed-point solves, implicit and unrolled backward passes.
//! - [`training`], [`datasets`]: classifier training on IDX/CIFAR data.
//! - [`bounds`]: numerical checks of the stability bounds.
//! - [`cli`]: the `qdeq` command line.

pub mod bounds;
pub mod cli;
pub mod datasets;
pub mod deqsolve;
pub mod encoding;
pub mod error;
pub mod measurement;
pub mod qmodel;
pub mod rng;
pub mod simcore;
pub mod training;

pub use error::{QdeqError, Result};
