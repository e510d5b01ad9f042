//! Classical-to-quantum encodings and input injection.

use serde::{Deserialize, Serialize};

use crate::error::{QdeqError, Result};
use crate::simcore::{backpropagate, Angle, GateKind, GateOp, ParamCircuit, StateVector, C64};

/// Rotation pattern applied to every qubit by the angle encoding.
pub const ANGLE_PATTERN: [GateKind; 4] = [GateKind::RY, GateKind::RZ, GateKind::RX, GateKind::RY];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    Amplitude,
    Angle,
}

/// Encoding `S_x` of an `input_dim`-vector into `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingSpec {
    kind: EncodingKind,
    num_qubits: usize,
    input_dim: usize,
    // Angle only: the encoding as a circuit whose slots are the input entries.
    angle_circuit: Option<ParamCircuit>,
}

impl EncodingSpec {
    pub fn amplitude(num_qubits: usize, input_dim: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 24 {
            return Err(QdeqError::invalid(format!("unsupported qubit count {num_qubits}")));
        }
        if input_dim == 0 || input_dim > 1usize << num_qubits {
            return Err(QdeqError::invalid(format!(
                "amplitude encoding of {input_dim} values needs 1..={} entries",
                1usize << num_qubits
            )));
        }
        Ok(Self {
            kind: EncodingKind::Amplitude,
            num_qubits,
            input_dim,
            angle_circuit: None,
        })
    }

    /// Angle encoding on `num_qubits` qubits; the input dimension is `4 * num_qubits`.
    pub fn angle(num_qubits: usize) -> Result<Self> {
        Ok(Self {
            kind: EncodingKind::Angle,
            num_qubits,
            input_dim: 4 * num_qubits,
            angle_circuit: Some(angle_encoding_circuit(num_qubits)?),
        })
    }

    pub fn new(kind: EncodingKind, num_qubits: usize, input_dim: usize) -> Result<Self> {
        match kind {
            EncodingKind::Amplitude => Self::amplitude(num_qubits, input_dim),
            EncodingKind::Angle if input_dim == 4 * num_qubits => Self::angle(num_qubits),
            EncodingKind::Angle => Err(QdeqError::invalid(format!(
                "angle encoding on {num_qubits} qubits takes {} values, not {input_dim}",
                4 * num_qubits
            ))),
        }
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn encode(&self, u: &[f64]) -> Result<StateVector> {
        match &self.angle_circuit {
            None => {
                check_len(u, self.input_dim)?;
                amplitude_encode(u, self.num_qubits)
            }
            Some(circuit) => {
                check_len(u, self.input_dim)?;
                circuit.apply(u, &StateVector::zero(self.num_qubits)?)
            }
        }
    }

    /// Pulls an adjoint state on the encoded state back to the classical input.
    ///
    /// `lambda` follows the convention `dF = 2 Re <lambda|dpsi>`; `encoded` must
    /// be `self.encode(u)`. Returns `dF/du`.
    pub fn vjp(&self, u: &[f64], encoded: StateVector, lambda: Vec<C64>) -> Result<Vec<f64>> {
        check_len(u, self.input_dim)?;
        match &self.angle_circuit {
            None => {
                let norm = l2(u);
                if norm == 0.0 {
                    return Err(QdeqError::DegenerateInput("zero vector cannot be normalized".into()));
                }
                let g: Vec<f64> = lambda[..u.len()].iter().map(|l| 2.0 * l.re).collect();
                let g_dot_hat: f64 = g.iter().zip(u).map(|(gi, ui)| gi * ui).sum::<f64>() / norm;
                Ok(g.iter()
                    .zip(u)
                    .map(|(gi, ui)| (gi - g_dot_hat * ui / norm) / norm)
                    .collect())
            }
            Some(circuit) => Ok(backpropagate(circuit, u, encoded, lambda)?.0),
        }
    }
}

fn check_len(u: &[f64], n: usize) -> Result<()> {
    if u.len() != n {
        return Err(QdeqError::DimensionMismatch {
            gate: None,
            detail: format!("encoding input of length {} (expected {n})", u.len()),
        });
    }
    Ok(())
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `x` zero-padded to `2^Q` entries and normalized.
pub fn amplitude_encode(x: &[f64], num_qubits: usize) -> Result<StateVector> {
    let dim = 1usize << num_qubits;
    if x.is_empty() || x.len() > dim {
        return Err(QdeqError::invalid(format!(
            "{} values do not fit in {num_qubits} qubits",
            x.len()
        )));
    }
    let norm = l2(x);
    if norm == 0.0 {
        return Err(QdeqError::DegenerateInput("zero vector cannot be normalized".into()));
    }
    if !norm.is_finite() {
        return Err(QdeqError::invalid("non-finite input to amplitude encoding"));
    }
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (a, v) in amps.iter_mut().zip(x) {
        *a = C64::new(v / norm, 0.0);
    }
    StateVector::from_amplitudes(num_qubits, amps)
}

/// Fixed-angle gates `RY, RZ, RX, RY` per qubit with angles `x[4k..4k+4]`.
pub fn angle_encode(x: &[f64], num_qubits: usize) -> Result<Vec<GateOp>> {
    check_len(x, 4 * num_qubits)?;
    Ok(angle_gates(num_qubits, |i| Angle::Fixed(x[i])))
}

/// The angle encoding with input entry `i` bound to trainable slot `i`.
pub fn angle_encoding_circuit(num_qubits: usize) -> Result<ParamCircuit> {
    ParamCircuit::new(num_qubits, angle_gates(num_qubits, Angle::Param), 4 * num_qubits)
}

fn angle_gates(num_qubits: usize, angle: impl Fn(usize) -> Angle) -> Vec<GateOp> {
    (0..num_qubits)
        .flat_map(|k| {
            let angle = &angle;
            ANGLE_PATTERN
                .iter()
                .enumerate()
                .map(move |(j, &kind)| GateOp::rotation(kind, k, angle(4 * k + j)))
        })
        .collect()
}

/// How the latent `z` and the input `x` are combined before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionMode {
    /// `z + x`.
    #[default]
    Add,
    /// `x` alone. The layer is then constant in `z`; useful as a test fixture.
    InputOnly,
}

pub fn inject(z: &[f64], x: &[f64], mode: InjectionMode) -> Result<Vec<f64>> {
    if z.len() != x.len() {
        return Err(QdeqError::DimensionMismatch {
            gate: None,
            detail: format!("latent of length {} injected with input of length {}", z.len(), x.len()),
        });
    }
    Ok(match mode {
        InjectionMode::Add => z.iter().zip(x).map(|(a, b)| a + b).collect(),
        InjectionMode::InputOnly => x.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::ObservableEnsemble;
    use crate::simcore::single_qubit_matrix;
    use std::f64::consts::PI;

    #[test]
    fn amplitude_examples() {
        let mut e1 = vec![0.0; 16];
        e1[0] = 1.0;
        assert_eq!(amplitude_encode(&e1, 4).unwrap(), StateVector::zero(4).unwrap());
        let ones = amplitude_encode(&[1.0; 16], 4).unwrap();
        assert!(ones.amplitudes().iter().all(|a| (a.re - 0.25).abs() < 1e-15 && a.im == 0.0));
        let s = amplitude_encode(&[3.0, 4.0], 2).unwrap();
        let re: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        assert!((re[0] - 0.6).abs() < 1e-15 && (re[1] - 0.8).abs() < 1e-15);
        assert_eq!(&re[2..], &[0.0, 0.0]);
    }

    #[test]
    fn amplitude_zero_is_degenerate() {
        assert!(matches!(
            amplitude_encode(&[0.0; 4], 2),
            Err(QdeqError::DegenerateInput(_))
        ));
    }

    #[test]
    fn angle_zero_is_ground_state() {
        let spec = EncodingSpec::angle(3).unwrap();
        assert_eq!(spec.encode(&[0.0; 12]).unwrap().amplitudes(), StateVector::zero(3).unwrap().amplitudes());
    }

    #[test]
    fn angle_half_turn_flips() {
        let spec = EncodingSpec::angle(1).unwrap();
        let s = spec.encode(&[PI, 0.0, 0.0, 0.0]).unwrap();
        let z = ObservableEnsemble::pauli_z(vec![0]).expect(&s).unwrap();
        assert!((z[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn angle_gate_order_and_length_check() {
        let gates = angle_encode(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], 2).unwrap();
        let kinds: Vec<GateKind> = gates.iter().map(|g| g.kind).collect();
        assert_eq!(kinds, [ANGLE_PATTERN, ANGLE_PATTERN].concat());
        assert_eq!(gates[5].target, 1);
        assert_eq!(gates[5].fixed_angle(), Some(0.6));
        assert!(angle_encode(&[0.0; 7], 2).is_err());
        assert!(EncodingSpec::new(EncodingKind::Angle, 4, 15).is_err());
    }

    #[test]
    fn angle_matches_explicit_matrix_product() {
        let x = [0.3, -1.2, 2.1, 0.7];
        let s = EncodingSpec::angle(1).unwrap().encode(&x).unwrap();
        let mut v = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        for (kind, angle) in ANGLE_PATTERN.iter().zip(x) {
            let m = single_qubit_matrix(*kind, angle);
            v = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
        }
        assert!((s.amplitudes()[0] - v[0]).norm() < 1e-14);
        assert!((s.amplitudes()[1] - v[1]).norm() < 1e-14);
    }

    #[test]
    fn inject_examples() {
        let x = [3.0, 4.0];
        assert_eq!(inject(&[0.0, 0.0], &x, InjectionMode::Add).unwrap(), x.to_vec());
        assert_eq!(inject(&[-3.0, -4.0], &x, InjectionMode::Add).unwrap(), vec![0.0, 0.0]);
        assert_eq!(inject(&[1.0, 2.0], &x, InjectionMode::Add).unwrap(), vec![4.0, 6.0]);
        assert_eq!(inject(&[1.0, 2.0], &x, InjectionMode::InputOnly).unwrap(), x.to_vec());
        assert!(inject(&[1.0], &x, InjectionMode::Add).is_err());
    }

    // F(u) = <Z_0> + 0.5 <Z_1> of the encoded state, derivative checked by finite differences.
    fn check_vjp(spec: &EncodingSpec, u: &[f64]) {
        let ens = ObservableEnsemble::pauli_z(vec![0, 1]);
        let w = [1.0, 0.5];
        let f = |u: &[f64]| -> f64 {
            let e = ens.expect(&spec.encode(u).unwrap()).unwrap();
            e[0] * w[0] + e[1] * w[1]
        };
        let encoded = spec.encode(u).unwrap();
        let lambda = ens.weighted_apply(&encoded, &w);
        let du = spec.vjp(u, encoded, lambda).unwrap();
        let h = 1e-6;
        for j in 0..u.len() {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[j] += h;
            dn[j] -= h;
            let fd = (f(&up) - f(&dn)) / (2.0 * h);
            assert!((du[j] - fd).abs() < 1e-7, "entry {j}: {} vs {fd}", du[j]);
        }
    }

    #[test]
    fn amplitude_vjp_matches_finite_differences() {
        check_vjp(&EncodingSpec::amplitude(2, 3).unwrap(), &[0.4, -1.1, 0.7]);
    }

    #[test]
    fn angle_vjp_matches_finite_differences() {
        check_vjp(&EncodingSpec::angle(2).unwrap(), &[0.4, -1.1, 0.7, 2.0, 0.1, 0.9, -0.3, 1.3]);
    }
}
