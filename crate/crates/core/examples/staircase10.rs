// The 10-qubit ten-class model: 4-qubit blocks on overlapping windows.

use qdeq::deqsolve::{forward_fixed_point, BroydenConfig};
use qdeq::measurement::UpsampleScale;
use qdeq::qmodel::{staircase_windows, ModelPreset};
use rand::{Rng, SeedableRng};

pub fn run_example() -> qdeq::Result<()> {
    println!("windows: {:?}", staircase_windows(10));
    let model = ModelPreset::TenClass.build(0, 50, UpsampleScale::Isometric)?;
    println!(
        "{} gates, {} trainable parameters, input dimension {}",
        model.circuit().gates().len(),
        model.num_params(),
        model.input_dim()
    );
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let x: Vec<f64> = (0..model.input_dim()).map(|_| rng.random()).collect();
    let fp = forward_fixed_point(&model, &x, &BroydenConfig::default())?;
    println!("equilibrium after {} steps, relative residual {:.3e}", fp.steps_taken, fp.residual);
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    run_example()
}
