use std::path::PathBuf;

use qdeq::datasets::DatasetName;
use qdeq::deqsolve::SolverMode;
use qdeq::encoding::EncodingKind;
use qdeq::training::TrainConfig;

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const ROWS: [(&str, DatasetName, EncodingKind); 5] = [
    ("mnist4_amp", DatasetName::Mnist4, EncodingKind::Amplitude),
    ("mnist4_angle", DatasetName::Mnist4, EncodingKind::Angle),
    ("mnist10", DatasetName::Mnist10, EncodingKind::Amplitude),
    ("fashion10", DatasetName::FashionMnist10, EncodingKind::Amplitude),
    ("cifar10", DatasetName::Cifar10, EncodingKind::Amplitude),
];

const MODES: [(&str, SolverMode); 6] = [
    ("implicit", SolverMode::Implicit),
    ("implicit_warmup", SolverMode::ImplicitWarmup),
    ("direct1", SolverMode::Direct(1)),
    ("direct2", SolverMode::Direct(2)),
    ("direct5", SolverMode::Direct(5)),
    ("direct10", SolverMode::Direct(10)),
];

#[test]
fn every_shipped_config_matches_its_preset() {
    let mut seen = 0;
    for (prefix, dataset, encoding) in ROWS {
        for (suffix, mode) in MODES {
            let path = config_dir().join(format!("{prefix}_{suffix}.json"));
            let cfg = TrainConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(cfg, TrainConfig::preset(dataset, encoding, mode), "{}", path.display());
            seen += 1;
        }
    }
    let on_disk = std::fs::read_dir(config_dir()).unwrap().count();
    assert_eq!(seen, on_disk);
}

#[test]
fn tuned_values() {
    let load = |name: &str| TrainConfig::load(config_dir().join(name)).unwrap();
    let m4 = load("mnist4_amp_implicit_warmup.json");
    assert_eq!((m4.learning_rate, m4.warmup_steps, m4.jac_loss_weight, m4.epochs), (0.05, 1875, 0.0, 100));
    let f = load("fashion10_implicit_warmup.json");
    assert_eq!((f.jac_loss_weight, f.jac_loss_freq), (0.8, 0.8));
    let c = load("cifar10_implicit_warmup.json");
    assert_eq!((c.learning_rate, c.warmup_steps, c.epochs), (0.01, 2350, 25));
}

#[test]
fn echo_reparses_identically() {
    for entry in std::fs::read_dir(config_dir()).unwrap() {
        let cfg = TrainConfig::load(entry.unwrap().path()).unwrap();
        assert_eq!(TrainConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}

#[test]
fn typos_are_rejected() {
    let text = std::fs::read_to_string(config_dir().join("mnist10_implicit.json")).unwrap();
    let bad = text.replacen("\"learning_rate\"", "\"learning_rte\"", 1);
    assert!(TrainConfig::from_json(&bad).is_err());
}
