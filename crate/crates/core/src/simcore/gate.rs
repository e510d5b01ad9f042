use std::fmt;

use serde::{Deserialize, Serialize};

use super::state::{apply_cnot, apply_single, qubit_mask, C64};
use crate::error::{QdeqError, Result};

/// The six gate kinds the simulator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    CNOT,
    PauliX,
    Hadamard,
}

impl GateKind {
    /// Pauli-generated rotation `exp(-i angle P / 2)`.
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::CNOT => "CNOT",
            GateKind::PauliX => "X",
            GateKind::Hadamard => "H",
        };
        f.write_str(name)
    }
}

/// Where a rotation angle comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// Index into the trainable parameter vector.
    Param(usize),
    /// Non-trainable angle in radians.
    Fixed(f64),
}

/// One gate of a [`super::ParamCircuit`].
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub target: usize,
    /// Control qubit (CNOT only).
    pub control: Option<usize>,
    /// Angle source (rotations only).
    pub angle: Option<Angle>,
}

impl GateOp {
    pub fn rotation(kind: GateKind, target: usize, angle: Angle) -> Self {
        debug_assert!(kind.is_rotation());
        Self {
            kind,
            target,
            control: None,
            angle: Some(angle),
        }
    }

    pub fn rx(target: usize, angle: Angle) -> Self {
        Self::rotation(GateKind::RX, target, angle)
    }

    pub fn ry(target: usize, angle: Angle) -> Self {
        Self::rotation(GateKind::RY, target, angle)
    }

    pub fn rz(target: usize, angle: Angle) -> Self {
        Self::rotation(GateKind::RZ, target, angle)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::CNOT,
            target,
            control: Some(control),
            angle: None,
        }
    }

    pub fn pauli_x(target: usize) -> Self {
        Self {
            kind: GateKind::PauliX,
            target,
            control: None,
            angle: None,
        }
    }

    pub fn hadamard(target: usize) -> Self {
        Self {
            kind: GateKind::Hadamard,
            target,
            control: None,
            angle: None,
        }
    }

    pub fn param_slot(&self) -> Option<usize> {
        match self.angle {
            Some(Angle::Param(slot)) => Some(slot),
            _ => None,
        }
    }

    pub fn fixed_angle(&self) -> Option<f64> {
        match self.angle {
            Some(Angle::Fixed(a)) => Some(a),
            _ => None,
        }
    }

    /// Checks the structural invariants against a register size and parameter count.
    pub fn validate(&self, num_qubits: usize, num_params: usize) -> Result<()> {
        if self.target >= num_qubits {
            return Err(QdeqError::invalid(format!(
                "{} target {} out of range for {} qubits",
                self.kind, self.target, num_qubits
            )));
        }
        match self.kind {
            GateKind::CNOT => {
                let control = self
                    .control
                    .ok_or_else(|| QdeqError::invalid("CNOT without control qubit"))?;
                if control >= num_qubits {
                    return Err(QdeqError::invalid(format!(
                        "CNOT control {control} out of range for {num_qubits} qubits"
                    )));
                }
                if control == self.target {
                    return Err(QdeqError::invalid("CNOT control equals target"));
                }
                if self.angle.is_some() {
                    return Err(QdeqError::invalid("CNOT cannot carry an angle"));
                }
            }
            GateKind::PauliX | GateKind::Hadamard => {
                if self.control.is_some() || self.angle.is_some() {
                    return Err(QdeqError::invalid(format!(
                        "{} takes neither control nor angle",
                        self.kind
                    )));
                }
            }
            GateKind::RX | GateKind::RY | GateKind::RZ => {
                if self.control.is_some() {
                    return Err(QdeqError::invalid(format!(
                        "{} takes no control qubit",
                        self.kind
                    )));
                }
                match self.angle {
                    None => {
                        return Err(QdeqError::invalid(format!(
                            "{} requires a parameter slot or fixed angle",
                            self.kind
                        )))
                    }
                    Some(Angle::Param(slot)) if slot >= num_params => {
                        return Err(QdeqError::invalid(format!(
                            "parameter slot {slot} out of range for {num_params} parameters"
                        )))
                    }
                    Some(Angle::Fixed(a)) if !a.is_finite() => {
                        return Err(QdeqError::invalid("non-finite fixed angle"))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Resolved rotation angle (0 for non-rotations).
    #[inline]
    pub(crate) fn angle_value(&self, theta: &[f64]) -> f64 {
        match self.angle {
            Some(Angle::Param(slot)) => theta[slot],
            Some(Angle::Fixed(a)) => a,
            None => 0.0,
        }
    }

    /// Applies the gate (or its inverse) with an explicit angle.
    pub(crate) fn apply_with_angle(&self, amps: &mut [C64], num_qubits: usize, angle: f64) {
        match self.kind {
            GateKind::CNOT => apply_cnot(amps, num_qubits, self.control.unwrap_or(0), self.target),
            kind => apply_single(amps, num_qubits, self.target, &single_qubit_matrix(kind, angle)),
        }
    }

    #[inline]
    pub(crate) fn apply(&self, amps: &mut [C64], num_qubits: usize, theta: &[f64]) {
        self.apply_with_angle(amps, num_qubits, self.angle_value(theta));
    }

    /// Applies the adjoint gate. Every non-rotation in the gate set is self-inverse.
    #[inline]
    pub(crate) fn apply_inverse(&self, amps: &mut [C64], num_qubits: usize, theta: &[f64]) {
        self.apply_with_angle(amps, num_qubits, -self.angle_value(theta));
    }
}

/// 2x2 matrix of a single-qubit gate kind; rotations use `exp(-i angle P / 2)`.
pub fn single_qubit_matrix(kind: GateKind, angle: f64) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let (s, c) = (angle / 2.0).sin_cos();
    match kind {
        GateKind::RX => [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]],
        GateKind::RY => [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]],
        GateKind::RZ => [[C64::new(c, -s), z], [z, C64::new(c, s)]],
        GateKind::PauliX => [[z, C64::new(1.0, 0.0)], [C64::new(1.0, 0.0), z]],
        GateKind::Hadamard => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            [[C64::new(h, 0.0), C64::new(h, 0.0)], [C64::new(h, 0.0), C64::new(-h, 0.0)]]
        }
        GateKind::CNOT => panic!("CNOT is not a single-qubit gate"),
    }
}

/// `<lambda| P_target |psi>` for the Pauli generator of a rotation kind.
pub(crate) fn generator_overlap(
    lambda: &[C64],
    psi: &[C64],
    num_qubits: usize,
    kind: GateKind,
    target: usize,
) -> C64 {
    let mask = qubit_mask(num_qubits, target);
    let dim = psi.len();
    let i_unit = C64::new(0.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    let mut base = 0;
    while base < dim {
        for i in base..base + mask {
            let j = i + mask;
            let (p0, p1) = match kind {
                GateKind::RX => (psi[j], psi[i]),
                GateKind::RY => (-i_unit * psi[j], i_unit * psi[i]),
                GateKind::RZ => (psi[i], -psi[j]),
                _ => unreachable!("generator requested for non-rotation"),
            };
            acc += lambda[i].conj() * p0 + lambda[j].conj() * p1;
        }
        base += mask << 1;
    }
    acc
}
