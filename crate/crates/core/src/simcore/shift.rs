use std::f64::consts::FRAC_PI_2;

use super::circuit::ParamCircuit;
use super::state::StateVector;
use crate::error::{QdeqError, Result};
use crate::measurement::ObservableEnsemble;

/// Parameter-shift derivative of every ensemble expectation with respect to `slot`.
///
/// With `V(t) = exp(-i t P / 2)` and a Pauli `P`, each expectation is a
/// sinusoid in `t` and `(f(t + pi/2) - f(t - pi/2)) / 2` is its exact
/// derivative. A slot shared by several gates is handled by shifting each
/// occurrence separately and summing (product rule).
pub fn parameter_shift_grad(
    circuit: &ParamCircuit,
    theta: &[f64],
    input_state: &StateVector,
    ensemble: &ObservableEnsemble,
    slot: usize,
) -> Result<Vec<f64>> {
    if slot >= circuit.num_params() {
        return Err(QdeqError::invalid(format!(
            "slot {slot} out of range for {} parameters",
            circuit.num_params()
        )));
    }
    ensemble.validate(circuit.num_qubits())?;
    let mut grad = vec![0.0; ensemble.len()];
    for (index, gate) in circuit.gates_for_slot(slot) {
        if !gate.kind.is_rotation() {
            return Err(QdeqError::UnsupportedGate {
                slot,
                kind: gate.kind.to_string(),
            });
        }
        let plus = ensemble.expect(&circuit.apply_shifted(theta, input_state, index, FRAC_PI_2)?)?;
        let minus = ensemble.expect(&circuit.apply_shifted(theta, input_state, index, -FRAC_PI_2)?)?;
        for (g, (p, m)) in grad.iter_mut().zip(plus.iter().zip(&minus)) {
            *g += 0.5 * (p - m);
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::gate::{Angle, GateOp};
    use std::f64::consts::PI;

    fn ry_circuit() -> ParamCircuit {
        ParamCircuit::from_gates(1, vec![GateOp::ry(0, Angle::Param(0))]).unwrap()
    }

    #[test]
    fn stationary_at_zero() {
        let ens = ObservableEnsemble::pauli_z(vec![0]);
        let g = parameter_shift_grad(&ry_circuit(), &[0.0], &StateVector::zero(1).unwrap(), &ens, 0)
            .unwrap();
        assert!(g[0].abs() < 1e-15);
    }

    #[test]
    fn minus_one_at_half_pi() {
        let ens = ObservableEnsemble::pauli_z(vec![0]);
        let g = parameter_shift_grad(&ry_circuit(), &[PI / 2.0], &StateVector::zero(1).unwrap(), &ens, 0)
            .unwrap();
        assert!((g[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn shared_slot_uses_product_rule() {
        // RY(t) RY(t) = RY(2t): <Z> = cos 2t, derivative -2 sin 2t.
        let c = ParamCircuit::from_gates(
            1,
            vec![GateOp::ry(0, Angle::Param(0)), GateOp::ry(0, Angle::Param(0))],
        )
        .unwrap();
        let ens = ObservableEnsemble::pauli_z(vec![0]);
        let t = 0.37;
        let g = parameter_shift_grad(&c, &[t], &StateVector::zero(1).unwrap(), &ens, 0).unwrap();
        assert!((g[0] + 2.0 * (2.0 * t).sin()).abs() < 1e-13);
    }

    #[test]
    fn slot_out_of_range() {
        let ens = ObservableEnsemble::pauli_z(vec![0]);
        assert!(parameter_shift_grad(&ry_circuit(), &[0.0], &StateVector::zero(1).unwrap(), &ens, 1).is_err());
    }
}
