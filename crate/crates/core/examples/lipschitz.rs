// Sampled Lipschitz constants of the 4-qubit model in the 2-norm and the
// max-norm.

use qdeq::bounds::{estimate_lipschitz, LipschitzNorm, PairConstraint};
use qdeq::measurement::UpsampleScale;
use qdeq::qmodel::ModelPreset;

pub fn run_example(pairs: usize) -> qdeq::Result<()> {
    let model = ModelPreset::Mnist4Amplitude.build(0, 50, UpsampleScale::Isometric)?;
    for norm in [LipschitzNorm::L2, LipschitzNorm::Max] {
        for constraint in [PairConstraint::Any, PairConstraint::UnitFar] {
            let l = estimate_lipschitz(&model, pairs, norm, constraint, 0)?;
            println!("{norm:?} {constraint:?}: {l:.4}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    run_example(5000)
}
