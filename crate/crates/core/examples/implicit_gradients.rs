// Implicit differentiation at the equilibrium against backpropagation
// through a deep unroll of the same layer.

use qdeq::deqsolve::{direct_unroll, forward_fixed_point, implicit_backward, BroydenConfig};
use qdeq::encoding::{EncodingSpec, InjectionMode};
use qdeq::measurement::{ObservableEnsemble, UpsampleMap, UpsampleScale};
use qdeq::qmodel::QuantumModel;
use qdeq::simcore::{random_layer, ParamCircuit};

pub fn run_example() -> qdeq::Result<()> {
    let layer = random_layer(11, 2, 10)?;
    let model = QuantumModel::new(
        EncodingSpec::amplitude(2, 4)?,
        ParamCircuit::new(2, layer.gates, layer.init_params.len())?,
        layer.init_params,
        ObservableEnsemble::pauli_z_all(2),
        UpsampleMap::new(2, 4, UpsampleScale::Isometric)?,
        InjectionMode::Add,
    )?;
    // A large input keeps the normalized encoding, and so the layer, contractive.
    let x = [1.5, 2.0, -1.2, 1.8];
    let dl_dz = [0.4, -1.0, 0.8, 0.25];

    let cfg = BroydenConfig::new(40, 1e-13);
    let z = forward_fixed_point(&model, &x, &cfg)?.z_star;
    let implicit = implicit_backward(&model, &x, &z, &dl_dz, &cfg)?;
    println!("implicit solve residual {:.2e}", implicit.solve_residual);

    for depth in [2, 5, 10, 30, 60] {
        let unrolled = direct_unroll(&model, &x, depth)?.backward(&model, &dl_dz)?;
        let diff: f64 = implicit.dtheta.iter().zip(&unrolled).map(|(a, b)| (a - b).powi(2)).sum();
        let size: f64 = unrolled.iter().map(|v| v * v).sum();
        println!("depth {depth:>2}: relative gap {:.3e}", (diff / size).sqrt());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    run_example()
}
