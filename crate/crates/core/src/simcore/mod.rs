//! Dense statevector simulation of parametrized circuits.
//!
//! Gates act in place through stride-indexed amplitude pairs; no `2^Q x 2^Q`
//! matrix is ever formed. Gradients are available two ways: a reverse
//! (adjoint) sweep over the whole circuit and the per-slot parameter-shift
//! rule.

mod adjoint;
mod circuit;
mod gate;
mod random_layer;
mod shift;
mod state;

pub use adjoint::{adjoint_gradients, AdjointGradients};
pub(crate) use adjoint::backpropagate;
pub use circuit::{apply_circuit, ParamCircuit};
pub use gate::{single_qubit_matrix, Angle, GateKind, GateOp};
pub use random_layer::{random_layer, RandomLayer};
pub use shift::parameter_shift_grad;
pub use state::{StateVector, C64, NORM_TOLERANCE};
pub(crate) use state::qubit_mask;
