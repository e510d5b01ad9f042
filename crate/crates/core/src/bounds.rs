//! Numerical checks of the contraction and overlap bounds, and sampled
//! Lipschitz constants of model maps.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::deqsolve::DeqLayer;
use crate::encoding::{amplitude_encode, EncodingSpec};
use crate::error::{QdeqError, Result};
use crate::measurement::ObservableKind;
use crate::qmodel::QuantumModel;
use crate::rng::indexed_stream;
use crate::simcore::StateVector;

/// Slack granted to every checked inequality for floating-point rounding.
pub const BOUND_SLACK: f64 = 1e-12;

pub const OVERLAP_CSV_HEADER: &str = "dist_sq,overlap,bound";

/// Outcome of one sampled bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub num_samples: usize,
    /// Samples with `bound - observed < -BOUND_SLACK` in any checked inequality.
    pub violations: usize,
    /// Smallest `bound - observed` seen (negative means violated).
    pub worst_margin: f64,
    /// Plot data, when the check produces any.
    pub samples_csv: Option<String>,
    /// Free-form observations that are measured, not asserted.
    pub diagnostics: Vec<String>,
}

impl BoundReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            num_samples: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            samples_csv: None,
            diagnostics: Vec::new(),
        }
    }

    // One sample may check several inequalities; it counts once as a violation.
    fn record(&mut self, margins: &[f64]) {
        self.num_samples += 1;
        let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        self.worst_margin = self.worst_margin.min(worst);
        if worst < -BOUND_SLACK {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl std::fmt::Display for BoundReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} samples, {} violations, worst margin {:.3e}",
            self.name, self.num_samples, self.violations, self.worst_margin
        )
    }
}

/// `sqrt(1 - |<a|b>|^2)` for pure states.
pub fn trace_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = a.inner(b)?.norm_sqr();
    Ok((1.0 - overlap).max(0.0).sqrt())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; the open interval keeps the log finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn unit_sphere(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        let r = norm(&v);
        if r > 1e-12 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Uniform in the `n`-ball of the given radius.
fn ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    unit_sphere(rng, n).into_iter().map(|x| x * r).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Checks `|<z|z'>| = 1 - ||z - z'||^2 / 2` and `1 - |<z|z'>|^2 <= ||z - z'||^2`
/// for unit vectors in `R^16` with `||z - z'|| <= 1`, overlaps taken from the
/// amplitude-encoded states.
pub fn verify_amplitude_overlap(num_pairs: usize, seed: u64) -> Result<BoundReport> {
    const N: usize = 16;
    let mut rng = indexed_stream(seed, "bounds", 1);
    let mut report = BoundReport::new("amplitude-overlap");
    while report.num_samples < num_pairs {
        let z = unit_sphere(&mut rng, N);
        let shifted: Vec<f64> = z.iter().zip(ball(&mut rng, N, 1.0)).map(|(a, d)| a + d).collect();
        let zp: Vec<f64> = shifted.iter().map(|v| v / norm(&shifted)).collect();
        let d2 = norm(&sub(&z, &zp)).powi(2);
        if d2 > 1.0 {
            continue;
        }
        let overlap = amplitude_encode(&z, 4)?.inner(&amplitude_encode(&zp, 4)?)?.norm();
        let identity_gap = (overlap - (1.0 - 0.5 * d2)).abs();
        report.record(&[-identity_gap, d2 - (1.0 - overlap * overlap)]);
    }
    Ok(report)
}

/// Single-qubit angle-encoding overlaps against `1 - sin(||z - z'||^2)` for
/// `z` uniform in `[0, 2pi)^4` and `z' - z` uniform in the unit ball, plus the
/// composed bound on 2 and 4 qubits, where the overlap must exceed both the
/// product of per-qubit bounds and `1 - sin(||z - z'||^2)`.
///
/// The CSV holds the single-qubit scatter.
pub fn verify_angle_overlap(num_pairs: usize, seed: u64) -> Result<BoundReport> {
    let mut rng = indexed_stream(seed, "bounds", 2);
    let mut report = BoundReport::new("angle-overlap");
    let single = EncodingSpec::angle(1)?;
    let mut csv = String::from(OVERLAP_CSV_HEADER);
    csv.push('\n');
    for _ in 0..num_pairs {
        let z: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..TAU)).collect();
        let zp: Vec<f64> = z.iter().zip(ball(&mut rng, 4, 1.0)).map(|(a, d)| a + d).collect();
        let d2 = norm(&sub(&z, &zp)).powi(2);
        let overlap = single.encode(&z)?.inner(&single.encode(&zp)?)?.norm();
        let bound = 1.0 - d2.sin();
        csv.push_str(&format!("{d2:.12e},{overlap:.12e},{bound:.12e}\n"));
        report.record(&[overlap - bound]);
    }
    for q in [2usize, 4] {
        let spec = EncodingSpec::angle(q)?;
        for _ in 0..num_pairs.div_ceil(4) {
            let z: Vec<f64> = (0..4 * q).map(|_| rng.random_range(0.0..TAU)).collect();
            let zp: Vec<f64> = z.iter().zip(ball(&mut rng, 4 * q, 1.0)).map(|(a, d)| a + d).collect();
            let overlap = spec.encode(&z)?.inner(&spec.encode(&zp)?)?.norm();
            let product: f64 = (0..q)
                .map(|k| 1.0 - norm(&sub(&z[4 * k..4 * k + 4], &zp[4 * k..4 * k + 4])).powi(2).sin())
                .product();
            let total = 1.0 - norm(&sub(&z, &zp)).powi(2).sin();
            report.record(&[overlap - product, overlap - total]);
        }
    }
    report.samples_csv = Some(csv);
    Ok(report)
}

/// Where `(a, b)` are drawn for [`verify_trig_inequality_on`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigDomain {
    /// `0 < a, b < 1`.
    UnitSquare,
    /// `a, b > 0` with `a + b <= 1`, the range the composed angle bound uses.
    Simplex,
}

/// `(1 - sin a)(1 - sin b) >= 1 - sin(a + b)` on the unit square.
pub fn verify_trig_inequality(num_samples: usize, seed: u64) -> Result<BoundReport> {
    verify_trig_inequality_on(num_samples, seed, TrigDomain::UnitSquare)
}

pub fn verify_trig_inequality_on(num_samples: usize, seed: u64, domain: TrigDomain) -> Result<BoundReport> {
    let mut rng = indexed_stream(seed, "bounds", 3);
    let name = match domain {
        TrigDomain::UnitSquare => "trig-inequality",
        TrigDomain::Simplex => "trig-inequality-simplex",
    };
    let mut report = BoundReport::new(name);
    while report.num_samples < num_samples {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        if domain == TrigDomain::Simplex && a + b > 1.0 {
            continue;
        }
        report.record(&[trig_margin(a, b)]);
    }
    Ok(report)
}

/// `(1 - sin a)(1 - sin b) - (1 - sin(a + b))`.
pub fn trig_margin(a: f64, b: f64) -> f64 {
    (1.0 - a.sin()) * (1.0 - b.sin()) - (1.0 - (a + b).sin())
}

/// Checks `|<M_k>_z - <M_k>_z'| <= c T(z, z')` for every observable, with
/// `c = 2` for Pauli ensembles and `c = 1` for basis projectors.
///
/// Inputs are `x` uniform in `[0, 1]^n`, `z` uniform in `[-1, 1]^n` and
/// `z' - z` uniform in the unit ball. For amplitude encoding the diagnostics
/// record how normalization changes distances between the injected vectors.
pub fn verify_contraction_bound(model: &QuantumModel, num_pairs: usize, seed: u64) -> Result<BoundReport> {
    let factor = match model.ensemble().kind() {
        ObservableKind::PauliZ => 2.0,
        ObservableKind::BasisProjector => 1.0,
    };
    let n = model.input_dim();
    let mut rng = indexed_stream(seed, "bounds", 4);
    let mut report = BoundReport::new(match model.ensemble().kind() {
        ObservableKind::PauliZ => "contraction-pauli",
        ObservableKind::BasisProjector => "contraction-projector",
    });
    let (mut ratio_sum, mut ratio_max) = (0.0, 0.0f64);
    for _ in 0..num_pairs {
        let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let zp: Vec<f64> = z.iter().zip(ball(&mut rng, n, 1.0)).map(|(a, d)| a + d).collect();
        let (sa, sb) = (model.output_state(&z, &x)?, model.output_state(&zp, &x)?);
        let t = trace_distance(&sa, &sb)?;
        let ea = model.ensemble().expect(&sa)?;
        let eb = model.ensemble().expect(&sb)?;
        let margins: Vec<f64> = ea.iter().zip(&eb).map(|(a, b)| factor * t - (a - b).abs()).collect();
        report.record(&margins);
        let u: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a + b).collect();
        let up: Vec<f64> = zp.iter().zip(&x).map(|(a, b)| a + b).collect();
        let raw = norm(&sub(&u, &up));
        if raw > 0.0 {
            let hat = |v: &[f64]| v.iter().map(|e| e / norm(v)).collect::<Vec<_>>();
            let ratio = norm(&sub(&hat(&u), &hat(&up))) / raw;
            ratio_sum += ratio;
            ratio_max = ratio_max.max(ratio);
        }
    }
    if model.encoding().kind() == crate::encoding::EncodingKind::Amplitude && num_pairs > 0 {
        report.diagnostics.push(format!(
            "normalized/raw input distance ratio: mean {:.4}, max {:.4}",
            ratio_sum / num_pairs as f64,
            ratio_max
        ));
    }
    Ok(report)
}

/// Norm used by [`estimate_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipschitzNorm {
    L2,
    Max,
}

/// Which pairs [`estimate_lipschitz`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairConstraint {
    /// `0 < ||z - z'|| <= 1`.
    Any,
    /// `1 <= ||z - z'|| <= 2`.
    UnitFar,
}

fn vec_norm(v: &[f64], kind: LipschitzNorm) -> f64 {
    match kind {
        LipschitzNorm::L2 => norm(v),
        LipschitzNorm::Max => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
    }
}

/// Largest sampled `||f(z; x) - f(z'; x)|| / ||z - z'||`.
///
/// `x` is uniform in `[0, 1]^n` and `z` uniform in `[-1, 1]^n` for each pair;
/// the offset direction is uniform and its length in the chosen norm is drawn
/// from the range fixed by `constraint`.
pub fn estimate_lipschitz<L: DeqLayer + ?Sized>(
    layer: &L,
    num_pairs: usize,
    kind: LipschitzNorm,
    constraint: PairConstraint,
    seed: u64,
) -> Result<f64> {
    if num_pairs == 0 {
        return Err(QdeqError::invalid("need at least one pair"));
    }
    let n = layer.dim();
    let mut rng = indexed_stream(seed, "bounds", 5);
    let mut best = 0.0f64;
    for _ in 0..num_pairs {
        let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dir = unit_sphere(&mut rng, n);
        let len = match constraint {
            PairConstraint::Any => 1.0 - rng.random::<f64>(),
            PairConstraint::UnitFar => rng.random_range(1.0..=2.0),
        };
        let scale = len / vec_norm(&dir, kind);
        let zp: Vec<f64> = z.iter().zip(&dir).map(|(a, d)| a + scale * d).collect();
        let out = sub(&layer.forward(&z, &x)?, &layer.forward(&zp, &x)?);
        best = best.max(vec_norm(&out, kind) / vec_norm(&sub(&z, &zp), kind));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::UpsampleScale;
    use crate::qmodel::ModelPreset;
    use crate::simcore::C64;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn random_state(q: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let raw: Vec<C64> = (0..1 << q).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
        let n = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(q, raw.into_iter().map(|a| a / n).collect()).unwrap()
    }

    #[test]
    fn trace_distance_extremes() {
        let a = StateVector::basis(2, 0).unwrap();
        let b = StateVector::basis(2, 3).unwrap();
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(trace_distance(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn trace_distance_matches_dense_eigenvalues() {
        use nalgebra::{Complex, DMatrix};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in 1..=3 {
            let a = random_state(q, &mut rng);
            let b = random_state(q, &mut rng);
            let dim = 1 << q;
            let proj = |s: &StateVector| {
                DMatrix::from_fn(dim, dim, |r, c| {
                    let v = s.amplitudes()[r] * s.amplitudes()[c].conj();
                    Complex::new(v.re, v.im)
                })
            };
            let diff = proj(&a) - proj(&b);
            let half_trace_norm: f64 = 0.5 * diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>();
            assert!((trace_distance(&a, &b).unwrap() - half_trace_norm).abs() < 1e-10);
        }
    }

    #[test]
    fn amplitude_suite() {
        let r = verify_amplitude_overlap(2000, 1).unwrap();
        assert_eq!(r.num_samples, 2000);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn amplitude_identity_at_unit_distance() {
        // z = e1, z' = (1/2, sqrt(3)/2): ||z - z'||^2 = 1 and the overlap is 1/2.
        let mut z = vec![0.0; 4];
        z[0] = 1.0;
        let mut zp = vec![0.0; 4];
        zp[0] = 0.5;
        zp[1] = 3f64.sqrt() / 2.0;
        let o = amplitude_encode(&z, 2).unwrap().inner(&amplitude_encode(&zp, 2).unwrap()).unwrap().norm();
        assert!((norm(&sub(&z, &zp)).powi(2) - 1.0).abs() < 1e-15);
        assert!((o - 0.5).abs() < 1e-15);
    }

    #[test]
    fn angle_suite_and_csv() {
        let r = verify_angle_overlap(300, 2).unwrap();
        assert!(r.passed(), "{r}");
        let csv = r.samples_csv.unwrap();
        assert!(csv.starts_with(OVERLAP_CSV_HEADER));
        assert_eq!(csv.lines().count(), 301);
    }

    #[test]
    fn angle_overlap_against_explicit_rotations() {
        use crate::encoding::ANGLE_PATTERN;
        use crate::simcore::single_qubit_matrix;
        let z = [0.4, 1.9, -0.3, 2.2];
        let zp = [0.6, 1.5, 0.1, 2.0];
        let explicit = |x: &[f64]| {
            let mut v = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
            for (k, a) in ANGLE_PATTERN.iter().zip(x) {
                let m = single_qubit_matrix(*k, *a);
                v = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
            }
            v
        };
        let (a, b) = (explicit(&z), explicit(&zp));
        let dense = (a[0].conj() * b[0] + a[1].conj() * b[1]).norm();
        let spec = EncodingSpec::angle(1).unwrap();
        let sim = spec.encode(&z).unwrap().inner(&spec.encode(&zp).unwrap()).unwrap().norm();
        assert!((dense - sim).abs() < 1e-12);
    }

    #[test]
    fn trig_examples_and_domains() {
        assert_eq!(trig_margin(0.0, 0.0), 0.0);
        let lhs = (1.0 - 0.5f64.sin()).powi(2);
        assert!((lhs - 0.2710).abs() < 1e-4);
        assert!(trig_margin(0.5, 0.5) > 0.0);
        // The unit-square statement fails near the far corner.
        assert!(trig_margin(1.0, 1.0) < 0.0);
        assert!(verify_trig_inequality_on(20_000, 4, TrigDomain::Simplex).unwrap().passed());
        assert!(!verify_trig_inequality(20_000, 4).unwrap().passed());
    }

    #[test]
    fn contraction_suites() {
        let model = ModelPreset::Mnist4Amplitude.build(1, 50, UpsampleScale::Isometric).unwrap();
        let r = verify_contraction_bound(&model, 500, 5).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.diagnostics.len(), 1);
    }

    #[test]
    fn saturating_pair() {
        let a = StateVector::basis(1, 0).unwrap();
        let b = StateVector::basis(1, 1).unwrap();
        let ens = crate::measurement::ObservableEnsemble::pauli_z(vec![0]);
        let delta = (ens.expect(&a).unwrap()[0] - ens.expect(&b).unwrap()[0]).abs();
        assert_eq!(delta, 2.0 * trace_distance(&a, &b).unwrap());
    }

    #[test]
    fn lipschitz_of_constant_and_linear_maps() {
        use crate::deqsolve::AffineLayer;
        let zero = AffineLayer::new(3, vec![0.0; 9], vec![], vec![]).unwrap();
        assert_eq!(estimate_lipschitz(&zero, 50, LipschitzNorm::L2, PairConstraint::Any, 1).unwrap(), 0.0);
        let a = vec![2.0, 1.0, 0.0, 0.5, 1.0, 0.3, 0.0, 0.2, 0.7];
        // Oracle: power iteration on A^T A.
        let mut v = vec![1.0, 1.0, 1.0];
        for _ in 0..500 {
            let av: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * v[j]).sum()).collect();
            let atav: Vec<f64> = (0..3).map(|j| (0..3).map(|i| a[i * 3 + j] * av[i]).sum()).collect();
            let n = norm(&atav);
            v = atav.into_iter().map(|x| x / n).collect();
        }
        let av: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * v[j]).sum()).collect();
        let sigma = norm(&av);
        let layer = AffineLayer::new(3, a, vec![], vec![]).unwrap();
        let est = estimate_lipschitz(&layer, 20_000, LipschitzNorm::L2, PairConstraint::Any, 2).unwrap();
        assert!(est <= sigma + 1e-12);
        assert!(est >= 0.97 * sigma, "{est} vs {sigma}");
    }

    #[test]
    fn default_model_is_max_norm_subcontractive_far_apart() {
        let model = ModelPreset::Mnist4Amplitude.build(8, 50, UpsampleScale::Isometric).unwrap();
        let l = estimate_lipschitz(&model, 2000, LipschitzNorm::Max, PairConstraint::UnitFar, 3).unwrap();
        assert!(l <= 1.0 + 1e-9, "{l}");
    }

    proptest! {
        #[test]
        fn trace_distance_is_a_metric(seed in any::<u64>(), q in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a, b, c) = (random_state(q, &mut rng), random_state(q, &mut rng), random_state(q, &mut rng));
            let ab = trace_distance(&a, &b).unwrap();
            prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(trace_distance(&a, &a).unwrap() < 1e-6);
            prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        }
    }
}
