// A depth-3 network of distinct quantum layers rewritten as one weight-tied,
// input-injected layer on a stacked latent.

use qdeq::deqsolve::{sequential_evaluation, universality_stack};
use qdeq::encoding::{EncodingSpec, InjectionMode};
use qdeq::measurement::{ObservableEnsemble, UpsampleMap, UpsampleScale};
use qdeq::qmodel::QuantumModel;
use qdeq::simcore::{random_layer, ParamCircuit};

pub fn run_example() -> qdeq::Result<()> {
    let layer = random_layer(5, 2, 8)?;
    let base = QuantumModel::new(
        EncodingSpec::amplitude(2, 4)?,
        ParamCircuit::new(2, layer.gates, layer.init_params.len())?,
        layer.init_params.clone(),
        ObservableEnsemble::pauli_z_all(2),
        UpsampleMap::new(2, 4, UpsampleScale::Isometric)?,
        InjectionMode::Add,
    )?;
    let models = (0..3)
        .map(|i| {
            let theta = layer.init_params.iter().map(|t| t + 0.7 * i as f64).collect();
            base.clone().with_theta(theta)
        })
        .collect::<qdeq::Result<Vec<_>>>()?;

    let x = [0.2, 0.9, 0.4, 0.6];
    let stacked = universality_stack(&models, &x)?;
    let sequential = sequential_evaluation(&models, &x)?;
    for (i, (a, b)) in stacked.iter().zip(&sequential).enumerate().skip(1) {
        let gap = a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        println!("block {i}: {a:.6?}  (gap to sequential {gap:.1e})");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    run_example()
}
