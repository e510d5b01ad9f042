// Solve for the equilibrium of the 4-qubit amplitude model on a random
// 4x4 "image" and compare Broyden with plain fixed-point iteration.

use qdeq::deqsolve::{direct_unroll, forward_fixed_point, BroydenConfig};
use qdeq::measurement::UpsampleScale;
use qdeq::qmodel::ModelPreset;
use rand::{Rng, SeedableRng};

pub fn run_example() -> qdeq::Result<()> {
    let model = ModelPreset::Mnist4Amplitude.build(3, 50, UpsampleScale::Isometric)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let x: Vec<f64> = (0..model.input_dim()).map(|_| rng.random()).collect();

    let fp = forward_fixed_point(&model, &x, &BroydenConfig::default())?;
    println!("Broyden: {} steps, converged {}", fp.steps_taken, fp.converged);
    for (i, r) in fp.trace.iter().enumerate() {
        println!("  step {:>2}  relative residual {r:.3e}", i + 1);
    }

    for depth in [1, 2, 5, 10] {
        let tape = direct_unroll(&model, &x, depth)?;
        println!("unrolled x{depth:<2} residual {:.3e}", tape.residual(&model)?);
    }

    let fz = model.forward(&fp.z_star, &x)?;
    let gap = fz.iter().zip(&fp.z_star).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |f(z*) - z*| = {gap:.3e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    run_example()
}
