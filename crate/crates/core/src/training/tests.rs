use rand::{Rng, SeedableRng};

use super::*;
use crate::datasets::{DatasetBundle, DatasetName, ImageDataset};
use crate::deqsolve::SolverMode;
use crate::encoding::EncodingKind;

// Four noisy 4x4 prototypes.
fn toy_set(n: usize, seed: u64) -> ImageDataset {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let protos: Vec<Vec<f64>> = (0..4)
        .map(|c| (0..16).map(|j| if (j + c) % 4 == 0 || j / 4 == c { 0.9 } else { 0.1 }).collect())
        .collect();
    let labels: Vec<usize> = (0..n).map(|i| i % 4).collect();
    let images = labels
        .iter()
        .map(|&l| protos[l].iter().map(|p| (p + rng.random_range(-0.08..0.08f64)).clamp(0.0, 1.0)).collect())
        .collect();
    ImageDataset::new(images, labels, 4, 4, 4).unwrap()
}

fn toy_bundle() -> DatasetBundle {
    DatasetBundle {
        name: DatasetName::Mnist4,
        train: toy_set(64, 1),
        val: toy_set(16, 2),
        test: toy_set(16, 3),
    }
}

fn small_cfg(mode: SolverMode) -> TrainConfig {
    let mut cfg = TrainConfig::preset(DatasetName::Mnist4, EncodingKind::Amplitude, mode);
    cfg.batch_size = 16;
    cfg.epochs = 4;
    cfg.random_ops = 12;
    cfg.seed = 11;
    cfg
}

#[test]
fn direct2_batch_gradient_matches_finite_differences() {
    let mut cfg = small_cfg(SolverMode::Direct(2));
    cfg.dropout_p = 0.0;
    let t = Trainer::new(cfg).unwrap();
    let data = toy_set(6, 5);
    let images: Vec<&[f64]> = data.images.iter().map(Vec::as_slice).collect();
    let bg = t.batch_gradient(&images, &data.labels, Pass::Direct(2), 0, false).unwrap();
    let base = t.params();
    let h = 1e-6;
    for j in 0..base.len() {
        let loss_at = |d: f64| {
            let mut p = base.clone();
            p[j] += d;
            let mut t2 = t.clone();
            t2.set_params(&p).unwrap();
            t2.batch_gradient(&images, &data.labels, Pass::Direct(2), 0, false).unwrap().loss
        };
        let fd = (loss_at(h) - loss_at(-h)) / (2.0 * h);
        let g = bg.grads[j];
        assert!((g - fd).abs() <= 1e-4 * fd.abs().max(1e-3), "param {j}: {g} vs {fd}");
    }
}

#[test]
fn implicit_batch_gradient_matches_finite_differences() {
    let mut cfg = small_cfg(SolverMode::Implicit);
    cfg.dropout_p = 0.0;
    cfg.broyden_max_steps = 40;
    cfg.broyden_abs_tol = 1e-12;
    let t = Trainer::new(cfg).unwrap();
    let data = toy_set(3, 6);
    let images: Vec<&[f64]> = data.images.iter().map(Vec::as_slice).collect();
    let bg = t.batch_gradient(&images, &data.labels, Pass::Implicit, 0, false).unwrap();
    let base = t.params();
    let h = 1e-5;
    let p = t.model().num_params();
    for j in (0..p).step_by(3) {
        let loss_at = |d: f64| {
            let mut q = base.clone();
            q[j] += d;
            let mut t2 = t.clone();
            t2.set_params(&q).unwrap();
            t2.batch_gradient(&images, &data.labels, Pass::Implicit, 0, false).unwrap().loss
        };
        let fd = (loss_at(h) - loss_at(-h)) / (2.0 * h);
        assert!((bg.grads[j] - fd).abs() <= 1e-3 * fd.abs().max(1e-2), "param {j}: {} vs {fd}", bg.grads[j]);
    }
}

#[test]
fn penalty_gradient_matches_coordinate_differences() {
    use crate::deqsolve::{jacobian_frobenius_estimate, jacobian_penalty_grad};
    let cfg = small_cfg(SolverMode::Implicit);
    let model = build_model(&cfg).unwrap();
    let x = &toy_set(1, 8).images[0];
    let z: Vec<f64> = (0..16).map(|i| 0.05 * (i as f64).sin()).collect();
    let seed_rng = || rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let (_, g) = jacobian_penalty_grad(&model, &z, x, 2, JAC_FD_STEP, &mut seed_rng()).unwrap();
    let h = 1e-5;
    for j in 0..model.num_params() {
        let at = |d: f64| {
            let mut th = model.theta().to_vec();
            th[j] += d;
            let m = model.clone().with_theta(th).unwrap();
            jacobian_frobenius_estimate(&m, &z, x, 2, &mut seed_rng()).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        assert!((g[j] - fd).abs() <= 1e-4 * fd.abs().max(1.0), "param {j}: {} vs {fd}", g[j]);
    }
}

#[test]
fn deterministic_runs_and_warmup_accounting() {
    let mut cfg = small_cfg(SolverMode::ImplicitWarmup);
    cfg.warmup_steps = 6;
    let bundle = toy_bundle();
    let run = || {
        let mut t = Trainer::new(cfg.clone()).unwrap();
        let m = t.fit(&bundle, |_| {}).unwrap();
        (m, t.checkpoint())
    };
    let (a, ca) = run();
    let (b, cb) = run();
    assert_eq!(a.epochs, b.epochs);
    assert_eq!(ca, cb);
    let steps_per_epoch = bundle.train.len().div_ceil(cfg.batch_size) as u64;
    assert_eq!(a.warmup_steps, 6);
    assert_eq!(a.warmup_steps + a.main_steps, cfg.epochs as u64 * steps_per_epoch);
    assert_eq!(a.epochs[0].phase, Phase::Warmup);
    assert_eq!(a.epochs[1].phase, Phase::WarmupToImplicit);
    assert_eq!(a.epochs[2].phase, Phase::Implicit);
}

#[test]
fn loss_trends_down_and_learns_toy_classes() {
    let mut cfg = small_cfg(SolverMode::Direct(1));
    cfg.epochs = 10;
    let bundle = toy_bundle();
    let mut t = Trainer::new(cfg).unwrap();
    let m = t.fit(&bundle, |_| {}).unwrap();
    let losses: Vec<f64> = m.epochs.iter().map(|e| e.train_loss).collect();
    let rises = losses[..5].windows(2).filter(|w| w[1] > w[0]).count();
    assert!(rises <= 1, "{losses:?}");
    assert!(m.test_acc >= 75.0, "test accuracy {}", m.test_acc);
}

#[test]
fn checkpoint_restores_model() {
    let cfg = small_cfg(SolverMode::Implicit);
    let mut t = Trainer::new(cfg).unwrap();
    let data = toy_set(16, 9);
    let images: Vec<&[f64]> = data.images.iter().map(Vec::as_slice).collect();
    t.train_step(&images, &data.labels).unwrap();
    let ck = Checkpoint::from_json(&t.checkpoint().to_json().unwrap()).unwrap();
    let back = Trainer::from_checkpoint(&ck).unwrap();
    assert_eq!(back.params(), t.params());
    assert_eq!(back.step(), 1);
    assert_eq!(back.evaluate(&data).unwrap(), t.evaluate(&data).unwrap());
}

#[test]
fn untrained_model_is_near_chance() {
    let cfg = small_cfg(SolverMode::Implicit);
    let t = Trainer::new(cfg).unwrap();
    let r = t.evaluate(&toy_set(400, 4)).unwrap();
    assert!(r.accuracy < 70.0);
    assert_eq!(r.residuals.len() + r.diverged, 400);
}
