// Three ways to differentiate a circuit: adjoint sweep, parameter shift and
// central finite differences.

use qdeq::measurement::ObservableEnsemble;
use qdeq::simcore::{adjoint_gradients, parameter_shift_grad, random_layer, ParamCircuit, StateVector};

pub fn run_example() -> qdeq::Result<()> {
    let q = 3;
    let layer = random_layer(7, q, 12)?;
    let circuit = ParamCircuit::new(q, layer.gates.clone(), layer.num_params())?;
    let theta = layer.init_params;
    let input = StateVector::zero(q)?;
    let ensemble = ObservableEnsemble::pauli_z_all(q);

    // Gradient of <Z_0> + 0.5 <Z_2>.
    let weights = [1.0, 0.0, 0.5];
    let adjoint = adjoint_gradients(&circuit, &theta, &input, &weights, &ensemble)?.dtheta;
    let cost = |t: &[f64]| -> qdeq::Result<f64> {
        let e = ensemble.expect(&circuit.apply(t, &input)?)?;
        Ok(e.iter().zip(&weights).map(|(a, w)| a * w).sum())
    };

    println!("{:>5} {:>14} {:>14} {:>14}", "slot", "adjoint", "shift", "finite diff");
    for j in 0..theta.len() {
        let shift: f64 = parameter_shift_grad(&circuit, &theta, &input, &ensemble, j)?
            .iter()
            .zip(&weights)
            .map(|(g, w)| g * w)
            .sum();
        let h = 1e-6;
        let (mut plus, mut minus) = (theta.clone(), theta.clone());
        plus[j] += h;
        minus[j] -= h;
        let fd = (cost(&plus)? - cost(&minus)?) / (2.0 * h);
        println!("{j:>5} {:>14.10} {shift:>14.10} {fd:>14.10}", adjoint[j]);
        assert!((adjoint[j] - shift).abs() < 1e-10 && (adjoint[j] - fd).abs() < 1e-6);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    run_example()
}
