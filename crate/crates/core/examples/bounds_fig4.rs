// Overlap of angle-encoded states against the lower bound 1 - sin(d^2),
// written as CSV for plotting, plus the other sampled bound checks.
//
// `cargo run --release --example bounds_fig4 -- out.csv`

use std::path::PathBuf;

use qdeq::bounds;
use qdeq::measurement::UpsampleScale;
use qdeq::qmodel::ModelPreset;

pub fn run_example(csv_path: Option<PathBuf>, pairs: usize) -> qdeq::Result<()> {
    let angle = bounds::verify_angle_overlap(pairs, 0)?;
    println!("{angle}");
    if let (Some(path), Some(csv)) = (csv_path, &angle.samples_csv) {
        std::fs::write(&path, csv).map_err(|e| qdeq::QdeqError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        println!("wrote {}", path.display());
    }

    println!("{}", bounds::verify_amplitude_overlap(pairs, 0)?);
    let model = ModelPreset::Mnist4Amplitude.build(0, 50, UpsampleScale::Isometric)?;
    let report = bounds::verify_contraction_bound(&model, pairs, 0)?;
    println!("{report}");
    for d in &report.diagnostics {
        println!("  {d}");
    }

    // The product-of-sines step is only safe while a + b <= 1.
    println!("{}", bounds::verify_trig_inequality_on(pairs, 0, bounds::TrigDomain::Simplex)?);
    println!("{}", bounds::verify_trig_inequality(pairs, 0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    run_example(std::env::args().nth(1).map(PathBuf::from), 3000)
}
