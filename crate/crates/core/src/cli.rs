//! The `qdeq` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, BoundReport};
use crate::datasets::{resolve_data_dir, DatasetBundle, SubsetSizes};
use crate::error::{QdeqError, Result};
use crate::measurement::ObservableEnsemble;
use crate::qmodel::{ModelPreset, QuantumModel};
use crate::training::{Checkpoint, TrainConfig, Trainer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

/// Directory searched for bare config file names that do not exist as given.
pub const CONFIG_DIR: &str = "configs";

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "qdeq", version, about = "Train and evaluate quantum deep equilibrium classifiers")]
pub struct RunSpec {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Train a model from a JSON config.
    Train(TrainArgs),
    /// Evaluate a checkpoint (or an untrained model from a config) on one split.
    Eval(EvalArgs),
    /// Check the contraction and overlap bounds by sampling.
    VerifyBounds(BoundsArgs),
    /// Write the angle-encoding overlap scatter as CSV.
    ExportPlotData(PlotArgs),
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Dataset root; falls back to QDEQ_DATA_DIR.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value = "qdeq-out")]
    pub output_dir: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct EvalArgs {
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Split::Test)]
    pub split: Split,
    /// Overrides the config seed; a checkpoint always keeps its own.
    #[arg(long, conflicts_with = "checkpoint")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    AmplitudeOverlap,
    AngleOverlap,
    TrigInequality,
    Contraction,
    All,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Pairs (or samples) per check; each check has its own default.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "qdeq-out")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct PlotArgs {
    #[arg(long, default_value_t = 3000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "qdeq-out")]
    pub output_dir: PathBuf,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match RunSpec::try_parse_from(argv) {
        Ok(s) => s,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&spec) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(err: &QdeqError) -> i32 {
    match err {
        QdeqError::TrainingAborted(_) | QdeqError::SolverDiverged { .. } => EXIT_DIVERGED,
        _ => EXIT_INVALID,
    }
}

pub fn execute(spec: &RunSpec) -> Result<i32> {
    match &spec.command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::VerifyBounds(a) => verify(a),
        Command::ExportPlotData(a) => export(a),
    }
}

/// Finds a config by path, falling back to the `configs/` directory.
pub fn resolve_config_path(path: &Path) -> PathBuf {
    if path.exists() || path.components().count() != 1 {
        return path.to_path_buf();
    }
    let local = Path::new(CONFIG_DIR).join(path);
    if local.exists() {
        return local;
    }
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(CONFIG_DIR).join(path);
    if shipped.exists() {
        shipped
    } else {
        path.to_path_buf()
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::load(resolve_config_path(path))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn load_bundle(cfg: &TrainConfig, data_dir: Option<&Path>) -> Result<DatasetBundle> {
    let dir = resolve_data_dir(data_dir).ok_or_else(|| {
        QdeqError::Config(format!("no data directory: pass --data-dir or set {}", crate::datasets::DATA_DIR_ENV))
    })?;
    let subsets = SubsetSizes {
        train: cfg.train_subset,
        test: cfg.test_subset,
    };
    DatasetBundle::load(cfg.dataset, &dir, cfg.seed, subsets)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| QdeqError::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| QdeqError::io(path, e))
}

fn train(a: &TrainArgs) -> Result<i32> {
    let cfg = load_config(&a.config, a.seed)?;
    let bundle = load_bundle(&cfg, a.data_dir.as_deref())?;
    create_dir(&a.output_dir)?;
    write(&a.output_dir.join("config.json"), &cfg.to_json())?;
    eprintln!(
        "training {} ({:?}, {}) on {} samples, validating on {}",
        cfg.dataset,
        cfg.encoding,
        cfg.solver_mode,
        bundle.train.len(),
        bundle.val.len()
    );
    let mut trainer = Trainer::new(cfg)?;
    let metrics = trainer.fit(&bundle, |e| {
        eprintln!(
            "epoch {:>3} [{}] loss {:.4} train {:.2}% val {:.2}% residual {:.3e}",
            e.epoch, e.phase, e.train_loss, e.train_acc, e.val_acc, e.mean_residual
        )
    })?;
    metrics.write_csv(a.output_dir.join("metrics.csv"))?;
    trainer.checkpoint().save(a.output_dir.join("checkpoint.json"))?;
    println!(
        "test accuracy {:.2}%, mean residual {:.3e}, {:.1}s",
        metrics.test_acc, metrics.test_residual, metrics.wall_time_seconds
    );
    Ok(EXIT_OK)
}

fn eval(a: &EvalArgs) -> Result<i32> {
    let trainer = match (&a.checkpoint, &a.config) {
        (Some(path), _) => Trainer::from_checkpoint(&Checkpoint::load(path)?)?,
        (None, Some(path)) => Trainer::new(load_config(path, a.seed)?)?,
        (None, None) => return Err(QdeqError::Config("pass --checkpoint or --config".into())),
    };
    let bundle = load_bundle(trainer.config(), a.data_dir.as_deref())?;
    let ds = match a.split {
        Split::Train => &bundle.train,
        Split::Val => &bundle.val,
        Split::Test => &bundle.test,
    };
    let r = trainer.evaluate(ds)?;
    println!(
        "{:?} split: {} samples, accuracy {:.2}%, mean residual {:.3e}, converged {:.1}%",
        a.split,
        ds.len(),
        r.accuracy,
        r.mean_residual,
        100.0 * r.converged_fraction(crate::training::CONVERGED_RESIDUAL)
    );
    Ok(EXIT_OK)
}

/// The 4-qubit default model with its Z readout swapped for projectors onto
/// the first four basis states.
pub fn projector_model(model: &QuantumModel) -> Result<QuantumModel> {
    let q = model.encoding().num_qubits();
    QuantumModel::new(
        model.encoding().clone(),
        model.circuit().clone(),
        model.theta().to_vec(),
        ObservableEnsemble::basis_projectors((0..q).collect()),
        *model.upsample(),
        model.injection(),
    )
}

/// Runs one suite (or all) and returns the reports in a fixed order.
pub fn run_suite(suite: Suite, pairs: Option<usize>, seed: u64) -> Result<Vec<BoundReport>> {
    let n = |default: usize| pairs.unwrap_or(default);
    let mut out = Vec::new();
    if matches!(suite, Suite::AmplitudeOverlap | Suite::All) {
        out.push(bounds::verify_amplitude_overlap(n(10_000), seed)?);
    }
    if matches!(suite, Suite::AngleOverlap | Suite::All) {
        out.push(bounds::verify_angle_overlap(n(3000), seed)?);
    }
    if matches!(suite, Suite::TrigInequality | Suite::All) {
        out.push(bounds::verify_trig_inequality(n(100_000), seed)?);
        out.push(bounds::verify_trig_inequality_on(n(100_000), seed, bounds::TrigDomain::Simplex)?);
    }
    if matches!(suite, Suite::Contraction | Suite::All) {
        let model = ModelPreset::Mnist4Amplitude.build(seed, 50, Default::default())?;
        out.push(bounds::verify_contraction_bound(&model, n(5000), seed)?);
        out.push(bounds::verify_contraction_bound(&projector_model(&model)?, n(5000), seed)?);
    }
    Ok(out)
}

fn verify(a: &BoundsArgs) -> Result<i32> {
    let reports = run_suite(a.suite, a.pairs, a.seed)?;
    let mut ok = true;
    for r in &reports {
        println!("{} {r}", if r.passed() { "PASS" } else { "FAIL" });
        for d in &r.diagnostics {
            println!("    {d}");
        }
        ok &= r.passed();
        if let Some(csv) = &r.samples_csv {
            create_dir(&a.output_dir)?;
            let path = a.output_dir.join(format!("{}.csv", r.name.replace('-', "_")));
            write(&path, csv)?;
            println!("    wrote {}", path.display());
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_INVALID })
}

fn export(a: &PlotArgs) -> Result<i32> {
    let r = bounds::verify_angle_overlap(a.pairs, a.seed)?;
    create_dir(&a.output_dir)?;
    let path = a.output_dir.join("angle_overlap.csv");
    write(&path, r.samples_csv.as_deref().unwrap_or_default())?;
    println!("wrote {} ({} points)", path.display(), a.pairs);
    Ok(EXIT_OK)
}
