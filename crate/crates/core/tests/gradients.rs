use proptest::prelude::*;
use qdeq::measurement::ObservableEnsemble;
use qdeq::simcore::{
    adjoint_gradients, parameter_shift_grad, random_layer, Angle, GateOp, ParamCircuit, StateVector, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(q: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let raw: Vec<C64> = (0..1 << q)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let n = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(q, raw.into_iter().map(|a| a / n).collect()).unwrap()
}

/// Random layer followed by fixed gates, including a slot reused twice.
fn circuit(seed: u64, q: usize, ops: usize) -> (ParamCircuit, Vec<f64>) {
    let layer = random_layer(seed, q, ops).unwrap();
    let mut gates = layer.gates.clone();
    let mut theta = layer.init_params.clone();
    gates.push(GateOp::hadamard(0));
    gates.push(GateOp::pauli_x(q - 1));
    gates.push(GateOp::ry(0, Angle::Fixed(0.37)));
    gates.push(GateOp::rx(q - 1, Angle::Param(theta.len())));
    gates.push(GateOp::rz(0, Angle::Param(theta.len())));
    theta.push(1.1);
    let n = theta.len();
    (ParamCircuit::new(q, gates, n).unwrap(), theta)
}

fn fd_jacobian(c: &ParamCircuit, theta: &[f64], psi: &StateVector, ens: &ObservableEnsemble) -> Vec<Vec<f64>> {
    let h = 1e-5;
    (0..theta.len())
        .map(|j| {
            let mut tp = theta.to_vec();
            let mut tm = theta.to_vec();
            tp[j] += h;
            tm[j] -= h;
            let p = ens.expect(&c.apply(&tp, psi).unwrap()).unwrap();
            let m = ens.expect(&c.apply(&tm, psi).unwrap()).unwrap();
            p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circuits_preserve_norm(seed in any::<u64>(), q in 1usize..7, ops in 0usize..40) {
        let (c, theta) = circuit(seed, q, ops);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let psi = random_state(q, &mut rng);
        let phi = random_state(q, &mut rng);
        let (a, b) = (c.apply(&theta, &psi).unwrap(), c.apply(&theta, &phi).unwrap());
        prop_assert!((a.norm() - 1.0).abs() < 1e-12);
        // Unitaries preserve inner products, not only norms.
        let before = psi.inner(&phi).unwrap();
        let after = a.inner(&b).unwrap();
        prop_assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn adjoint_shift_and_fd_agree(seed in any::<u64>(), q in 1usize..6, ops in 1usize..20) {
        let (c, theta) = circuit(seed, q, ops);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let psi = random_state(q, &mut rng);
        let ens = ObservableEnsemble::pauli_z_all(q);
        let fd = fd_jacobian(&c, &theta, &psi, &ens);
        for k in 0..q {
            let mut cot = vec![0.0; q];
            cot[k] = 1.0;
            let adj = adjoint_gradients(&c, &theta, &psi, &cot, &ens).unwrap().dtheta;
            for j in 0..theta.len() {
                let shift = parameter_shift_grad(&c, &theta, &psi, &ens, j).unwrap()[k];
                prop_assert!((adj[j] - shift).abs() < 1e-10, "adjoint {} vs shift {}", adj[j], shift);
                prop_assert!((adj[j] - fd[j][k]).abs() < 1e-6, "adjoint {} vs fd {}", adj[j], fd[j][k]);
            }
        }
    }
}
