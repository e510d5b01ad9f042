use super::gate::{Angle, GateOp};
use super::state::StateVector;
use crate::error::{QdeqError, Result};

/// Ordered gate list over `num_qubits` qubits with `num_params` trainable slots.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    num_qubits: usize,
    gates: Vec<GateOp>,
    num_params: usize,
}

impl ParamCircuit {
    /// Builds a circuit, validating every gate. `num_params` may exceed the
    /// highest referenced slot; unreferenced slots have zero gradient.
    pub fn new(num_qubits: usize, gates: Vec<GateOp>, num_params: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(QdeqError::invalid("circuit needs at least one qubit"));
        }
        for (index, gate) in gates.iter().enumerate() {
            gate.validate(num_qubits, num_params)
                .map_err(|e| QdeqError::DimensionMismatch {
                    gate: Some(index),
                    detail: e.to_string(),
                })?;
        }
        Ok(Self {
            num_qubits,
            gates,
            num_params,
        })
    }

    /// Builds a circuit whose parameter count is one past the highest slot used.
    pub fn from_gates(num_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        let num_params = gates
            .iter()
            .filter_map(GateOp::param_slot)
            .max()
            .map_or(0, |m| m + 1);
        Self::new(num_qubits, gates, num_params)
    }

    pub fn empty(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, Vec::new(), 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// Gates (with their positions) reading trainable slot `slot`.
    pub fn gates_for_slot(&self, slot: usize) -> impl Iterator<Item = (usize, &GateOp)> {
        self.gates
            .iter()
            .enumerate()
            .filter(move |(_, g)| g.param_slot() == Some(slot))
    }

    /// Appends `other`, mapping its qubit `k` to `qubit_map[k]` and shifting its
    /// parameter slots past the ones already present.
    pub fn append_mapped(&mut self, other: &ParamCircuit, qubit_map: &[usize]) -> Result<()> {
        if qubit_map.len() != other.num_qubits {
            return Err(QdeqError::invalid(format!(
                "qubit map of length {} for a {}-qubit circuit",
                qubit_map.len(),
                other.num_qubits
            )));
        }
        let offset = self.num_params;
        let mut appended = Vec::with_capacity(other.gates.len());
        for gate in &other.gates {
            let mut g = gate.clone();
            g.target = qubit_map[g.target];
            g.control = g.control.map(|c| qubit_map[c]);
            if let Some(Angle::Param(slot)) = g.angle {
                g.angle = Some(Angle::Param(slot + offset));
            }
            g.validate(self.num_qubits, offset + other.num_params)?;
            appended.push(g);
        }
        self.gates.extend(appended);
        self.num_params += other.num_params;
        Ok(())
    }

    pub(crate) fn check_inputs(&self, theta: &[f64], state: &StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!(
                    "{}-qubit state given to a {}-qubit circuit",
                    state.num_qubits(),
                    self.num_qubits
                ),
            });
        }
        if theta.len() != self.num_params {
            let gate = self
                .gates
                .iter()
                .position(|g| g.param_slot().is_some_and(|s| s >= theta.len()));
            return Err(QdeqError::DimensionMismatch {
                gate,
                detail: format!(
                    "{} parameters given, circuit has {}",
                    theta.len(),
                    self.num_params
                ),
            });
        }
        Ok(())
    }

    /// Applies `U(theta)` to `state` in place.
    pub fn apply_in_place(&self, theta: &[f64], state: &mut StateVector) -> Result<()> {
        self.check_inputs(theta, state)?;
        let q = self.num_qubits;
        let amps = state.amplitudes_mut();
        for gate in &self.gates {
            gate.apply(amps, q, theta);
        }
        Ok(())
    }

    /// `U(theta)|state>`; the input is left untouched.
    pub fn apply(&self, theta: &[f64], state: &StateVector) -> Result<StateVector> {
        let mut out = state.clone();
        self.apply_in_place(theta, &mut out)?;
        Ok(out)
    }

    /// Like [`ParamCircuit::apply`] but with `shift` added to the angle of gate `gate_index`.
    pub fn apply_shifted(
        &self,
        theta: &[f64],
        state: &StateVector,
        gate_index: usize,
        shift: f64,
    ) -> Result<StateVector> {
        self.check_inputs(theta, state)?;
        if gate_index >= self.gates.len() {
            return Err(QdeqError::invalid(format!(
                "gate index {gate_index} out of range"
            )));
        }
        let q = self.num_qubits;
        let mut out = state.clone();
        let amps = out.amplitudes_mut();
        for (i, gate) in self.gates.iter().enumerate() {
            let mut angle = gate.angle_value(theta);
            if i == gate_index {
                angle += shift;
            }
            gate.apply_with_angle(amps, q, angle);
        }
        Ok(out)
    }
}

/// `U(theta)|state>` for `circuit`.
pub fn apply_circuit(circuit: &ParamCircuit, theta: &[f64], state: &StateVector) -> Result<StateVector> {
    circuit.apply(theta, state)
}
