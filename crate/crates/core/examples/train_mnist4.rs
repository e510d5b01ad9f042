// Train the 4-qubit model on MNIST digits 0/3/6/9 with warm-up followed by
// implicit differentiation.
//
// Reads the IDX files from `$QDEQ_DATA_DIR/mnist` (or `./data/mnist`).
// `cargo run --release --example train_mnist4 -- [train_subset] [epochs]`

use std::path::{Path, PathBuf};

use qdeq::datasets::{resolve_data_dir, DatasetBundle, DatasetName, SubsetSizes, TRAIN_FRACTION};
use qdeq::deqsolve::SolverMode;
use qdeq::encoding::EncodingKind;
use qdeq::training::{TrainConfig, Trainer};

pub fn run_example(data_dir: &Path, train_subset: usize, epochs: usize) -> qdeq::Result<()> {
    if !DatasetName::Mnist4.available(data_dir) {
        println!("no MNIST files under {}; skipping", data_dir.display());
        return Ok(());
    }
    let mut cfg = TrainConfig::preset(DatasetName::Mnist4, EncodingKind::Amplitude, SolverMode::ImplicitWarmup);
    cfg.epochs = epochs;
    cfg.train_subset = Some(train_subset);
    cfg.test_subset = Some(1000);
    // Warm up for the first quarter of the steps.
    let batches = ((train_subset as f64 * TRAIN_FRACTION) as usize).div_ceil(cfg.batch_size);
    cfg.warmup_steps = batches * epochs / 4;

    let subsets = SubsetSizes {
        train: cfg.train_subset,
        test: cfg.test_subset,
    };
    let bundle = DatasetBundle::load(cfg.dataset, data_dir, cfg.seed, subsets)?;
    let mut trainer = Trainer::new(cfg)?;
    let metrics = trainer.fit(&bundle, |e| {
        println!(
            "epoch {:>2} [{}] loss {:.4} val {:.1}% residual {:.2e}",
            e.epoch, e.phase, e.train_loss, e.val_acc, e.mean_residual
        )
    })?;
    println!(
        "test accuracy {:.2}%, mean residual {:.2e}, {:.1}s",
        metrics.test_acc, metrics.test_residual, metrics.wall_time_seconds
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> qdeq::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let subset = args.next().unwrap_or(2000);
    let epochs = args.next().unwrap_or(25);
    let dir = resolve_data_dir(None).unwrap_or_else(|| PathBuf::from("data"));
    run_example(&dir, subset, epochs)
}
