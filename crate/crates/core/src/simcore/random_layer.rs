use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gate::{Angle, GateKind, GateOp};
use crate::error::{QdeqError, Result};

const RANDOM_KINDS: [GateKind; 4] = [GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::CNOT];

/// Seeded random layer: gates plus initial values of their trainable slots.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomLayer {
    pub gates: Vec<GateOp>,
    pub init_params: Vec<f64>,
}

impl RandomLayer {
    pub fn num_params(&self) -> usize {
        self.init_params.len()
    }
}

/// Draws `num_ops` gates uniformly from {RX, RY, RZ, CNOT}.
///
/// Rotation targets and ordered CNOT (control, target) pairs are uniform over
/// the valid choices. Every rotation gets its own trainable slot, numbered in
/// draw order from 0, initialized uniformly in `[0, 2pi)`. On a single qubit a
/// drawn CNOT is redrawn.
pub fn random_layer(seed: u64, num_qubits: usize, num_ops: usize) -> Result<RandomLayer> {
    if num_qubits == 0 {
        return Err(QdeqError::invalid("random layer needs at least one qubit"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::with_capacity(num_ops);
    let mut init_params = Vec::new();
    while gates.len() < num_ops {
        let kind = RANDOM_KINDS[rng.random_range(0..RANDOM_KINDS.len())];
        if kind == GateKind::CNOT {
            if num_qubits < 2 {
                continue;
            }
            let control = rng.random_range(0..num_qubits);
            let mut target = rng.random_range(0..num_qubits - 1);
            if target >= control {
                target += 1;
            }
            gates.push(GateOp::cnot(control, target));
        } else {
            let target = rng.random_range(0..num_qubits);
            gates.push(GateOp::rotation(kind, target, Angle::Param(init_params.len())));
            init_params.push(rng.random_range(0.0..TAU));
        }
    }
    Ok(RandomLayer { gates, init_params })
}
