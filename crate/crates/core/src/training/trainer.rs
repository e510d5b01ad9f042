use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::adam::{AdamConfig, AdamState};
use super::checkpoint::Checkpoint;
use super::config::TrainConfig;
use super::head::ClassifierHead;
use super::loss::{argmax, cross_entropy};
use super::metrics::{EpochMetrics, Phase, RunMetrics};
use crate::datasets::{DatasetBundle, ImageDataset};
use crate::deqsolve::{
    direct_unroll, forward_fixed_point, implicit_backward, jacobian_penalty_grad, BroydenConfig, DeqLayer, LayerVjp,
    SolverMode,
};
use crate::error::{QdeqError, Result};
use crate::qmodel::QuantumModel;
use crate::rng::{derive_seed, indexed_stream, stream};

/// Step of the central difference used for the Jacobian-penalty gradient.
pub const JAC_FD_STEP: f64 = 1e-4;

/// Relative residual below which a solve counts as converged in reports.
pub const CONVERGED_RESIDUAL: f64 = 1e-2;

/// How the equilibrium is obtained for one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    Direct(usize),
    Implicit,
}

impl From<SolverMode> for Pass {
    fn from(mode: SolverMode) -> Self {
        match mode {
            SolverMode::Direct(l) => Pass::Direct(l),
            SolverMode::Implicit | SolverMode::ImplicitWarmup => Pass::Implicit,
        }
    }
}

// The model with one recovery from a degenerate (all-zero) injected input:
// the latent is halved and the evaluation repeated.
struct Guarded<'a>(&'a QuantumModel);

fn halve(z: &[f64]) -> Vec<f64> {
    z.iter().map(|v| 0.5 * v).collect()
}

impl DeqLayer for Guarded<'_> {
    fn dim(&self) -> usize {
        self.0.input_dim()
    }

    fn num_params(&self) -> usize {
        self.0.num_params()
    }

    fn forward(&self, z: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        match self.0.forward(z, x) {
            Err(QdeqError::DegenerateInput(_)) => self.0.forward(&halve(z), x),
            r => r,
        }
    }

    fn vjp(&self, z: &[f64], x: &[f64], cotangent: &[f64]) -> Result<LayerVjp> {
        match self.0.vjp(z, x, cotangent) {
            Err(QdeqError::DegenerateInput(_)) => {
                let mut v = self.0.vjp(&halve(z), x, cotangent)?;
                v.dz.iter_mut().for_each(|d| *d *= 0.5);
                Ok(v)
            }
            r => r,
        }
    }
}

struct SampleOutcome {
    loss: f64,
    correct: bool,
    residual: f64,
    penalty: f64,
    dtheta: Vec<f64>,
    dweight: Vec<f64>,
    dbias: Vec<f64>,
}

/// Loss and gradient of one mini-batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGradient {
    /// Mean cross-entropy plus the weighted penalty when it was applied.
    pub loss: f64,
    pub cross_entropy: f64,
    pub correct: usize,
    /// Samples that contributed (the others diverged).
    pub valid: usize,
    pub diverged: usize,
    pub mean_residual: f64,
    /// Mean gradient over `[theta, head weight, head bias]`.
    pub grads: Vec<f64>,
}

/// Accuracy and residual statistics of one evaluation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    /// Percent of samples classified correctly; diverged samples count as wrong.
    pub accuracy: f64,
    pub mean_residual: f64,
    /// Per-sample relative residuals of the samples that did not diverge.
    pub residuals: Vec<f64>,
    pub diverged: usize,
}

impl EvalResult {
    /// Fraction of all samples whose residual is at most `threshold`.
    pub fn converged_fraction(&self, threshold: f64) -> f64 {
        let total = self.residuals.len() + self.diverged;
        if total == 0 {
            return 0.0;
        }
        self.residuals.iter().filter(|&&r| r <= threshold).count() as f64 / total as f64
    }
}

/// Equilibrium (or unrolled output) and its residual.
fn solve(layer: &Guarded<'_>, x: &[f64], pass: Pass, broyden: &BroydenConfig) -> Result<(Vec<f64>, f64)> {
    match pass {
        Pass::Direct(depth) => {
            let tape = direct_unroll(layer, x, depth)?;
            let r = tape.residual(layer)?;
            Ok((tape.output().to_vec(), r))
        }
        Pass::Implicit => {
            let fp = forward_fixed_point(layer, x, broyden)?;
            Ok((fp.z_star, fp.residual))
        }
    }
}

/// Classifies every sample of `dataset` in evaluation mode.
pub fn evaluate(
    model: &QuantumModel,
    head: &ClassifierHead,
    dataset: &ImageDataset,
    mode: SolverMode,
    broyden: &BroydenConfig,
) -> Result<EvalResult> {
    let layer = Guarded(model);
    let pass = Pass::from(mode);
    let outcomes: Vec<Option<(bool, f64)>> = dataset
        .images
        .par_iter()
        .zip(dataset.labels.par_iter())
        .map(|(x, &label)| match solve(&layer, x, pass, broyden) {
            Ok((z, residual)) => Ok(Some((argmax(&head.forward_masked(&z, None)) == label, residual))),
            Err(QdeqError::SolverDiverged { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut correct = 0usize;
    let mut residuals = Vec::with_capacity(outcomes.len());
    for (ok, r) in outcomes.iter().flatten() {
        correct += usize::from(*ok);
        residuals.push(*r);
    }
    let diverged = outcomes.len() - residuals.len();
    let mean_residual = if residuals.is_empty() {
        f64::NAN
    } else {
        residuals.iter().sum::<f64>() / residuals.len() as f64
    };
    Ok(EvalResult {
        accuracy: if outcomes.is_empty() { 0.0 } else { 100.0 * correct as f64 / outcomes.len() as f64 },
        mean_residual,
        residuals,
        diverged,
    })
}

/// Optimizer, model and head of one run.
#[derive(Debug, Clone)]
pub struct Trainer {
    cfg: TrainConfig,
    model: QuantumModel,
    head: ClassifierHead,
    adam: AdamState,
    step: u64,
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub metrics: RunMetrics,
    pub checkpoint: Checkpoint,
}

impl Trainer {
    /// Fresh model and head for `cfg`. The circuit comes from the `"circuit"`
    /// seed stream and the head initialization from `"head"`.
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let model = build_model(&cfg)?;
        let head = ClassifierHead::init(
            cfg.dataset.num_classes(),
            model.input_dim(),
            cfg.dropout_p,
            &mut stream(cfg.seed, "head"),
        )?;
        Self::with_parts(cfg, model, head)
    }

    pub fn with_parts(cfg: TrainConfig, model: QuantumModel, head: ClassifierHead) -> Result<Self> {
        cfg.validate()?;
        if head.dim != model.input_dim() {
            return Err(QdeqError::invalid(format!(
                "head reads {} features, model produces {}",
                head.dim,
                model.input_dim()
            )));
        }
        let adam = AdamState::new(model.num_params() + head.num_params());
        Ok(Self {
            cfg,
            model,
            head,
            adam,
            step: 0,
        })
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let cfg = ckpt.config.clone();
        cfg.validate()?;
        let model = build_model(&cfg)?.with_theta(ckpt.theta.clone())?;
        let classes = cfg.dataset.num_classes();
        let dim = model.input_dim();
        if ckpt.head_weight.len() != classes * dim || ckpt.head_bias.len() != classes {
            return Err(QdeqError::Format("checkpoint head does not match its config".into()));
        }
        let head = ClassifierHead {
            num_classes: classes,
            dim,
            weight: ckpt.head_weight.clone(),
            bias: ckpt.head_bias.clone(),
            dropout_p: cfg.dropout_p,
        };
        let mut t = Self::with_parts(cfg, model, head)?;
        if ckpt.adam.m.len() != t.adam.m.len() || ckpt.adam.v.len() != t.adam.v.len() {
            return Err(QdeqError::Format("checkpoint optimizer state has the wrong size".into()));
        }
        t.adam = ckpt.adam.clone();
        t.step = ckpt.step;
        Ok(t)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.cfg.clone(),
            step: self.step,
            theta: self.model.theta().to_vec(),
            head_weight: self.head.weight.clone(),
            head_bias: self.head.bias.clone(),
            adam: self.adam.clone(),
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn model(&self) -> &QuantumModel {
        &self.model
    }

    pub fn head(&self) -> &ClassifierHead {
        &self.head
    }

    /// Optimizer steps taken so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn skipped_steps(&self) -> u64 {
        self.adam.skipped
    }

    /// `[theta, head weight, head bias]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.model.theta().to_vec();
        p.extend(&self.head.weight);
        p.extend(&self.head.bias);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        let p = self.model.num_params();
        let w = self.head.weight.len();
        if params.len() != p + w + self.head.bias.len() {
            return Err(QdeqError::DimensionMismatch {
                gate: None,
                detail: format!("{} parameters given, run has {}", params.len(), p + w + self.head.bias.len()),
            });
        }
        self.model.set_theta(params[..p].to_vec())?;
        self.head.weight.copy_from_slice(&params[p..p + w]);
        self.head.bias.copy_from_slice(&params[p + w..]);
        Ok(())
    }

    /// The pass used by optimizer step `step`.
    pub fn pass_for_step(&self, step: u64) -> Pass {
        match self.cfg.solver_mode {
            SolverMode::Direct(l) => Pass::Direct(l),
            SolverMode::Implicit => Pass::Implicit,
            SolverMode::ImplicitWarmup if step < self.cfg.warmup_steps as u64 => Pass::Direct(self.cfg.warmup_depth),
            SolverMode::ImplicitWarmup => Pass::Implicit,
        }
    }

    fn is_warmup_step(&self, step: u64) -> bool {
        self.cfg.solver_mode == SolverMode::ImplicitWarmup && step < self.cfg.warmup_steps as u64
    }

    /// Whether the Jacobian penalty is applied at optimizer step `step`.
    pub fn penalty_active(&self, step: u64) -> bool {
        self.cfg.jac_loss_weight > 0.0
            && self.cfg.jac_loss_freq > 0.0
            && indexed_stream(self.cfg.seed, "jac", step).random::<f64>() < self.cfg.jac_loss_freq
    }

    fn sample(&self, x: &[f64], label: usize, pass: Pass, sample_index: u64, jac: bool) -> Result<Option<SampleOutcome>> {
        let layer = Guarded(&self.model);
        let broyden = self.cfg.broyden();
        let diverged = |e: &QdeqError| matches!(e, QdeqError::SolverDiverged { .. });
        let (z, residual, tape) = match pass {
            Pass::Direct(depth) => {
                let tape = direct_unroll(&layer, x, depth)?;
                let r = tape.residual(&layer)?;
                (tape.output().to_vec(), r, Some(tape))
            }
            Pass::Implicit => match forward_fixed_point(&layer, x, &broyden) {
                Ok(fp) => (fp.z_star, fp.residual, None),
                Err(e) if diverged(&e) => return Ok(None),
                Err(e) => return Err(e),
            },
        };
        let mask = (self.head.dropout_p > 0.0)
            .then(|| self.head.draw_mask(&mut indexed_stream(self.cfg.seed, "dropout", sample_index)));
        let logits = self.head.forward_masked(&z, mask.as_deref());
        let (loss, dlogits) = cross_entropy(&logits, label);
        let hg = self.head.backward(&z, mask.as_deref(), &dlogits);
        let mut dtheta = match &tape {
            Some(tape) => tape.backward(&layer, &hg.dz)?,
            None => implicit_backward(&layer, x, &z, &hg.dz, &broyden)?.dtheta,
        };
        let mut penalty = 0.0;
        if jac {
            let mut rng = indexed_stream(self.cfg.seed, "jac-probe", sample_index);
            let (p, g) = jacobian_penalty_grad(&layer, &z, x, self.cfg.jac_probes, JAC_FD_STEP, &mut rng)?;
            penalty = p;
            let w = self.cfg.jac_loss_weight;
            dtheta.iter_mut().zip(&g).for_each(|(d, gi)| *d += w * gi);
        }
        Ok(Some(SampleOutcome {
            loss,
            correct: argmax(&logits) == label,
            residual,
            penalty,
            dtheta,
            dweight: hg.dweight,
            dbias: hg.dbias,
        }))
    }

    /// Mean loss and gradient over a batch. Sample `i` draws its dropout mask
    /// from stream index `first_sample + i`.
    pub fn batch_gradient(
        &self,
        images: &[&[f64]],
        labels: &[usize],
        pass: Pass,
        first_sample: u64,
        jac: bool,
    ) -> Result<BatchGradient> {
        if images.len() != labels.len() {
            return Err(QdeqError::invalid("batch images and labels differ in length"));
        }
        let outcomes: Vec<Option<SampleOutcome>> = images
            .par_iter()
            .zip(labels.par_iter())
            .enumerate()
            .map(|(i, (x, &label))| self.sample(x, label, pass, first_sample + i as u64, jac))
            .collect::<Result<_>>()?;
        let p = self.model.num_params();
        let w = self.head.weight.len();
        let mut grads = vec![0.0; p + w + self.head.bias.len()];
        let (mut ce, mut pen, mut res, mut correct, mut valid) = (0.0, 0.0, 0.0, 0usize, 0usize);
        for o in outcomes.iter().flatten() {
            ce += o.loss;
            pen += o.penalty;
            res += o.residual;
            correct += usize::from(o.correct);
            valid += 1;
            grads[..p].iter_mut().zip(&o.dtheta).for_each(|(g, d)| *g += d);
            grads[p..p + w].iter_mut().zip(&o.dweight).for_each(|(g, d)| *g += d);
            grads[p + w..].iter_mut().zip(&o.dbias).for_each(|(g, d)| *g += d);
        }
        let k = valid.max(1) as f64;
        grads.iter_mut().for_each(|g| *g /= k);
        let cross_entropy = ce / k;
        Ok(BatchGradient {
            loss: cross_entropy + if jac { self.cfg.jac_loss_weight * pen / k } else { 0.0 },
            cross_entropy,
            correct,
            valid,
            diverged: outcomes.len() - valid,
            mean_residual: res / k,
            grads,
        })
    }

    fn adam_config(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.cfg.learning_rate,
            beta1: self.cfg.adam_beta1,
            beta2: self.cfg.adam_beta2,
            eps: self.cfg.adam_eps,
        }
    }

    /// One optimizer step on the given batch.
    pub fn train_step(&mut self, images: &[&[f64]], labels: &[usize]) -> Result<BatchGradient> {
        let pass = self.pass_for_step(self.step);
        let jac = self.penalty_active(self.step);
        let first = self.step * self.cfg.batch_size as u64;
        let bg = self.batch_gradient(images, labels, pass, first, jac)?;
        if bg.valid > 0 {
            let mut grads = bg.grads.clone();
            if let Some(limit) = self.cfg.grad_clip_norm {
                let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > limit {
                    grads.iter_mut().for_each(|g| *g *= limit / norm);
                }
            }
            let mut params = self.params();
            let cfg = self.adam_config();
            if self.adam.step(&mut params, &grads, &cfg) {
                self.set_params(&params)?;
            }
        }
        self.step += 1;
        Ok(bg)
    }

    /// The mode used to evaluate after the steps taken so far.
    pub fn eval_mode(&self) -> SolverMode {
        match self.pass_for_step(self.step.saturating_sub(1)) {
            Pass::Direct(l) => SolverMode::Direct(l),
            Pass::Implicit => SolverMode::Implicit,
        }
    }

    pub fn evaluate(&self, dataset: &ImageDataset) -> Result<EvalResult> {
        evaluate(&self.model, &self.head, dataset, self.eval_mode(), &self.cfg.broyden())
    }

    /// Runs all configured epochs on `bundle.train`, validating after each
    /// epoch and testing at the end. Aborts when more than 10% of an epoch's
    /// batches had a diverged solve.
    pub fn fit<F>(&mut self, bundle: &DatasetBundle, mut on_epoch: F) -> Result<RunMetrics>
    where
        F: FnMut(&EpochMetrics),
    {
        let start = Instant::now();
        let train = &bundle.train;
        if train.is_empty() {
            return Err(QdeqError::invalid("empty training set"));
        }
        let mut metrics = RunMetrics::default();
        for epoch in 0..self.cfg.epochs {
            let mut order: Vec<usize> = (0..train.len()).collect();
            order.shuffle(&mut indexed_stream(self.cfg.seed, "shuffle", epoch as u64));
            let (mut loss_sum, mut correct, mut seen) = (0.0, 0usize, 0usize);
            let (mut warm, mut main, mut diverged_batches, mut batches) = (0u64, 0u64, 0u64, 0u64);
            for chunk in order.chunks(self.cfg.batch_size) {
                let images: Vec<&[f64]> = chunk.iter().map(|&i| train.images[i].as_slice()).collect();
                let labels: Vec<usize> = chunk.iter().map(|&i| train.labels[i]).collect();
                if self.is_warmup_step(self.step) {
                    warm += 1;
                } else {
                    main += 1;
                }
                let bg = self.train_step(&images, &labels)?;
                batches += 1;
                if bg.diverged > 0 {
                    diverged_batches += 1;
                }
                loss_sum += bg.cross_entropy * bg.valid as f64;
                correct += bg.correct;
                seen += chunk.len();
            }
            metrics.warmup_steps += warm;
            metrics.main_steps += main;
            metrics.diverged_batches += diverged_batches;
            if diverged_batches * 10 > batches {
                return Err(QdeqError::TrainingAborted(format!(
                    "epoch {}: solver diverged in {diverged_batches} of {batches} batches",
                    epoch + 1
                )));
            }
            let val = if bundle.val.is_empty() { None } else { Some(self.evaluate(&bundle.val)?) };
            let phase = match (warm > 0, main > 0, self.cfg.solver_mode) {
                (true, true, _) => Phase::WarmupToImplicit,
                (true, false, _) => Phase::Warmup,
                (false, _, SolverMode::Direct(_)) => Phase::Direct,
                (false, _, _) => Phase::Implicit,
            };
            let e = EpochMetrics {
                epoch: epoch + 1,
                phase,
                train_loss: loss_sum / seen.max(1) as f64,
                train_acc: 100.0 * correct as f64 / seen.max(1) as f64,
                val_acc: val.as_ref().map_or(f64::NAN, |v| v.accuracy),
                mean_residual: val.as_ref().map_or(f64::NAN, |v| v.mean_residual),
            };
            on_epoch(&e);
            metrics.epochs.push(e);
        }
        if !bundle.test.is_empty() {
            let test = self.evaluate(&bundle.test)?;
            metrics.test_acc = test.accuracy;
            metrics.test_residual = test.mean_residual;
        }
        metrics.skipped_steps = self.adam.skipped;
        metrics.wall_time_seconds = start.elapsed().as_secs_f64();
        Ok(metrics)
    }
}

/// The quantum model described by `cfg`, with its circuit seed derived from `cfg.seed`.
pub fn build_model(cfg: &TrainConfig) -> Result<QuantumModel> {
    cfg.model_preset()
        .build(derive_seed(cfg.seed, "circuit"), cfg.random_ops, cfg.upsample_scale)
}

/// Trains `model` and `head` on `bundle` under `cfg`.
pub fn train<F>(
    bundle: &DatasetBundle,
    model: QuantumModel,
    head: ClassifierHead,
    cfg: &TrainConfig,
    on_epoch: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochMetrics),
{
    let mut trainer = Trainer::with_parts(cfg.clone(), model, head)?;
    let metrics = trainer.fit(bundle, on_epoch)?;
    Ok(TrainOutcome {
        metrics,
        checkpoint: trainer.checkpoint(),
    })
}
