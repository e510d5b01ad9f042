use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{QdeqError, Result};

/// Limits of a Broyden solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroydenConfig {
    /// Maximum number of quasi-Newton steps (evaluations of `g` after the first).
    pub max_steps: usize,
    /// Stop once `||g(z)||_2` falls to this value.
    pub abs_tol: f64,
    /// Rank of the low-rank inverse-Jacobian correction; oldest updates are dropped.
    pub memory: usize,
}

impl Default for BroydenConfig {
    fn default() -> Self {
        Self {
            max_steps: 10,
            abs_tol: 1e-6,
            memory: 10,
        }
    }
}

impl BroydenConfig {
    pub fn new(max_steps: usize, abs_tol: f64) -> Self {
        Self {
            max_steps,
            abs_tol,
            memory: max_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(QdeqError::invalid("Broyden needs at least one step"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(QdeqError::invalid(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        Ok(())
    }
}

/// Best iterate of a root solve of `g(z) = f(z) - z`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    pub z_star: Vec<f64>,
    /// `||g(z*)|| / (||f(z*)|| + 1e-9)`, the minimum over `trace`.
    pub residual: f64,
    /// `||g(z*)||_2`.
    pub abs_residual: f64,
    pub steps_taken: usize,
    pub converged: bool,
    /// Relative residual of every visited iterate, starting with `z0`.
    pub trace: Vec<f64>,
}

/// `||g|| / (||g + z|| + 1e-9)`, i.e. `||f(z) - z|| / (||f(z)|| + 1e-9)`.
pub fn relative_residual(g: &[f64], z: &[f64]) -> f64 {
    let f_norm = g.iter().zip(z).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
    norm(g) / (f_norm + 1e-9)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Inverse-Jacobian estimate H = -I + sum_i u_i v_i^T.
struct LowRankInverse {
    us: VecDeque<Vec<f64>>,
    vs: VecDeque<Vec<f64>>,
    memory: usize,
}

impl LowRankInverse {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = x.iter().map(|v| -v).collect();
        for (u, v) in self.us.iter().zip(&self.vs) {
            let c = dot(v, x);
            out.iter_mut().zip(u).for_each(|(o, ui)| *o += c * ui);
        }
        out
    }

    fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = x.iter().map(|v| -v).collect();
        for (u, v) in self.us.iter().zip(&self.vs) {
            let c = dot(u, x);
            out.iter_mut().zip(v).for_each(|(o, vi)| *o += c * vi);
        }
        out
    }

    // Good Broyden: H += (s - H y) s^T H / (s^T H y).
    fn update(&mut self, s: &[f64], y: &[f64]) {
        if self.memory == 0 {
            return;
        }
        let hy = self.apply(y);
        let denom = dot(s, &hy);
        if !denom.is_finite() || denom.abs() < 1e-30 {
            return;
        }
        let u = s.iter().zip(&hy).map(|(a, b)| (a - b) / denom).collect();
        let v = self.apply_transpose(s);
        if self.us.len() == self.memory {
            self.us.pop_front();
            self.vs.pop_front();
        }
        self.us.push_back(u);
        self.vs.push_back(v);
    }
}

fn finite_or_diverged(v: &[f64], step: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(QdeqError::SolverDiverged { step })
    }
}

/// Finds a root of `g` starting from `z0` with undamped good-Broyden steps.
///
/// The inverse Jacobian starts at `-I`, so the first step is a plain
/// fixed-point step `z1 = f(z0)`. Returns the visited iterate with the
/// smallest relative residual.
pub fn broyden_root<G>(mut g: G, z0: &[f64], cfg: &BroydenConfig) -> Result<FixedPointResult>
where
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let mut z = z0.to_vec();
    let mut gz = g(&z)?;
    if gz.len() != z.len() {
        return Err(QdeqError::DimensionMismatch {
            gate: None,
            detail: format!("root map returned {} entries for {} unknowns", gz.len(), z.len()),
        });
    }
    finite_or_diverged(&gz, 0)?;
    let mut inverse = LowRankInverse {
        us: VecDeque::new(),
        vs: VecDeque::new(),
        memory: cfg.memory,
    };
    let mut trace = vec![relative_residual(&gz, &z)];
    let mut best = (z.clone(), trace[0], norm(&gz));
    let mut steps = 0;
    while norm(&gz) > cfg.abs_tol && steps < cfg.max_steps {
        let dz: Vec<f64> = inverse.apply(&gz).into_iter().map(|v| -v).collect();
        let z_new: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + b).collect();
        steps += 1;
        finite_or_diverged(&z_new, steps)?;
        let g_new = g(&z_new)?;
        finite_or_diverged(&g_new, steps)?;
        let y: Vec<f64> = g_new.iter().zip(&gz).map(|(a, b)| a - b).collect();
        inverse.update(&dz, &y);
        z = z_new;
        gz = g_new;
        let r = relative_residual(&gz, &z);
        trace.push(r);
        if r < best.1 {
            best = (z.clone(), r, norm(&gz));
        }
    }
    let (z_star, residual, abs_residual) = best;
    Ok(FixedPointResult {
        z_star,
        residual,
        abs_residual,
        steps_taken: steps,
        converged: abs_residual <= cfg.abs_tol,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_in_one_step() {
        let c = [0.3, -1.0, 2.5];
        let r = broyden_root(|z| Ok(c.iter().zip(z).map(|(a, b)| a - b).collect()), &[0.0; 3], &BroydenConfig::default())
            .unwrap();
        assert!(r.converged);
        assert!(r.steps_taken <= 2);
        for (a, b) in r.z_star.iter().zip(&c) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_fixed_point() {
        // Oracle: plain iteration z <- cos z, run to convergence.
        let mut oracle = 0.5f64;
        for _ in 0..500 {
            oracle = oracle.cos();
        }
        let cfg = BroydenConfig::new(30, 1e-12);
        let r = broyden_root(|z| Ok(vec![z[0].cos() - z[0]]), &[0.0], &cfg).unwrap();
        assert!(r.converged);
        assert!((r.z_star[0] - oracle).abs() < 1e-10);
        assert!((r.z_star[0] - 0.7390851).abs() < 1e-7);
    }

    #[test]
    fn residual_is_trace_minimum() {
        let r = broyden_root(|z| Ok(vec![(3.0 * z[0]).sin() - z[0]]), &[1.0], &BroydenConfig::new(4, 1e-14))
            .unwrap();
        let min = r.trace.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(r.residual, min);
        assert!(r.steps_taken <= 4);
        assert_eq!(r.trace.len(), r.steps_taken + 1);
    }

    #[test]
    fn non_finite_reports_step() {
        let mut calls = 0;
        let err = broyden_root(
            |z| {
                calls += 1;
                Ok(if calls >= 3 { vec![f64::NAN] } else { vec![1.0 - z[0] * 0.5] })
            },
            &[0.0],
            &BroydenConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, QdeqError::SolverDiverged { step: 2 });
    }

    #[test]
    fn zero_memory_is_plain_iteration() {
        let cfg = BroydenConfig {
            max_steps: 3,
            abs_tol: 1e-12,
            memory: 0,
        };
        let r = broyden_root(|z| Ok(vec![0.5 * z[0] + 1.0 - z[0]]), &[0.0], &cfg).unwrap();
        // Iterates 0, 1, 1.5, 1.75.
        assert!((r.z_star[0] - 1.75).abs() < 1e-15);
    }
}
