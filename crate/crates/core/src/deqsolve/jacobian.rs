use rand::Rng;

use super::broyden::norm;
use super::layer::DeqLayer;
use crate::error::{QdeqError, Result};

fn rademacher<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Hutchinson estimate of `||df/dz||_F^2`: the mean of `||J^T e||^2` over
/// Rademacher probes `e`.
pub fn jacobian_frobenius_estimate<L, R>(layer: &L, z: &[f64], x: &[f64], num_probes: usize, rng: &mut R) -> Result<f64>
where
    L: DeqLayer + ?Sized,
    R: Rng + ?Sized,
{
    if num_probes == 0 {
        return Err(QdeqError::invalid("Hutchinson estimate needs at least one probe"));
    }
    let mut total = 0.0;
    for _ in 0..num_probes {
        let e = rademacher(rng, layer.dim());
        let w = layer.vjp_z(z, x, &e)?;
        total += w.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(total / num_probes as f64)
}

/// Hutchinson penalty and a finite-difference estimate of its gradient in `theta`.
///
/// For a probe `e` with `w = J^T e`, `d||w||^2/dtheta` equals
/// `2 ||w||` times the derivative of `e^T df/dtheta` along `z` in the
/// direction `w / ||w||`. That directional derivative is taken by a central
/// difference of step `step`, so each probe costs two extra adjoint sweeps
/// instead of one pair per parameter. `z` is held fixed.
pub fn jacobian_penalty_grad<L, R>(
    layer: &L,
    z: &[f64],
    x: &[f64],
    num_probes: usize,
    step: f64,
    rng: &mut R,
) -> Result<(f64, Vec<f64>)>
where
    L: DeqLayer + ?Sized,
    R: Rng + ?Sized,
{
    if num_probes == 0 {
        return Err(QdeqError::invalid("Hutchinson estimate needs at least one probe"));
    }
    let mut penalty = 0.0;
    let mut grad = vec![0.0; layer.num_params()];
    for _ in 0..num_probes {
        let e = rademacher(rng, layer.dim());
        let w = layer.vjp_z(z, x, &e)?;
        let w_norm = norm(&w);
        penalty += w_norm * w_norm;
        if w_norm == 0.0 {
            continue;
        }
        let shifted = |sign: f64| -> Vec<f64> { z.iter().zip(&w).map(|(zi, wi)| zi + sign * step * wi / w_norm).collect() };
        let plus = layer.grad_theta(&shifted(1.0), x, &e)?;
        let minus = layer.grad_theta(&shifted(-1.0), x, &e)?;
        let scale = w_norm / step;
        for (g, (p, m)) in grad.iter_mut().zip(plus.iter().zip(&minus)) {
            *g += scale * (p - m);
        }
    }
    let k = num_probes as f64;
    grad.iter_mut().for_each(|g| *g /= k);
    Ok((penalty / k, grad))
}
