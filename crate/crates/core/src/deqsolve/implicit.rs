use super::broyden::{broyden_root, norm, relative_residual, BroydenConfig, FixedPointResult};
use super::layer::DeqLayer;
use crate::error::Result;

/// Largest relative residual at which [`implicit_backward`] trusts the linear solve.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-2;

/// Solves `f(z; x) = z` from `z0 = 0`, injecting the same `x` at every evaluation.
pub fn forward_fixed_point<L: DeqLayer + ?Sized>(layer: &L, x: &[f64], cfg: &BroydenConfig) -> Result<FixedPointResult> {
    let z0 = vec![0.0; layer.dim()];
    broyden_root(
        |z| {
            let mut f = layer.forward(z, x)?;
            f.iter_mut().zip(z).for_each(|(fi, zi)| *fi -= zi);
            Ok(f)
        },
        &z0,
        cfg,
    )
}

/// Output of [`implicit_backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitGradient {
    pub dtheta: Vec<f64>,
    /// Solution of `q = J_f^T q + dl/dz*`.
    pub q: Vec<f64>,
    /// A truncated Neumann series was used, because the Broyden solve failed
    /// or `z_star` was too far from equilibrium.
    pub used_neumann: bool,
    /// `||J_f^T q - q + dl/dz*||_2` of the returned `q`.
    pub solve_residual: f64,
}

/// Loss gradient with respect to the layer parameters at an equilibrium.
///
/// With `J_g = J_f - I` at `z*`, the implicit function theorem gives
/// `dl/dtheta = q^T df/dtheta` where `q^T J_g = -dl/dz*`. The linear system is
/// solved with the same Broyden routine applied to
/// `h(q) = J_f^T q - q + dl/dz*`. If that solve blows up or ends worse than
/// `q = 0`, the Neumann series `sum_k (J_f^T)^k dl/dz*` is used instead. It
/// is truncated at `cfg.max_steps` terms, or earlier at the first term that
/// fails to shrink, so a non-contractive `J_f` cannot blow it up. The first
/// term alone is the one-step gradient.
///
/// The linear system only describes the gradient at an equilibrium. When the
/// relative residual of `z_star` exceeds [`EQUILIBRIUM_TOLERANCE`] it can be
/// close to singular even though the true fixed point is well conditioned, so
/// the truncated series is used directly.
pub fn implicit_backward<L: DeqLayer + ?Sized>(
    layer: &L,
    x: &[f64],
    z_star: &[f64],
    loss_grad: &[f64],
    cfg: &BroydenConfig,
) -> Result<ImplicitGradient> {
    let n = layer.dim();
    let grad_norm = norm(loss_grad);
    if grad_norm == 0.0 {
        return Ok(ImplicitGradient {
            dtheta: vec![0.0; layer.num_params()],
            q: vec![0.0; n],
            used_neumann: false,
            solve_residual: 0.0,
        });
    }
    let h = |q: &[f64]| -> Result<Vec<f64>> {
        let mut out = layer.vjp_z(z_star, x, q)?;
        for ((o, qi), l) in out.iter_mut().zip(q).zip(loss_grad) {
            *o += l - qi;
        }
        Ok(out)
    };
    let mut gz = layer.forward(z_star, x)?;
    gz.iter_mut().zip(z_star).for_each(|(g, z)| *g -= z);
    let at_equilibrium = relative_residual(&gz, z_star) <= EQUILIBRIUM_TOLERANCE;
    let solved = if at_equilibrium { Some(broyden_root(h, &vec![0.0; n], cfg)) } else { None };
    let (q, used_neumann, solve_residual) = match solved {
        Some(Ok(r)) if r.abs_residual.is_finite() && r.abs_residual <= grad_norm => (r.z_star, false, r.abs_residual),
        _ => {
            let mut q = loss_grad.to_vec();
            let mut term = loss_grad.to_vec();
            let mut last = grad_norm;
            for _ in 1..cfg.max_steps {
                term = layer.vjp_z(z_star, x, &term)?;
                let size = norm(&term);
                if !(size < last) {
                    break;
                }
                last = size;
                q.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
            }
            let residual = norm(&h(&q)?);
            (q, true, residual)
        }
    };
    let dtheta = layer.grad_theta(z_star, x, &q)?;
    Ok(ImplicitGradient {
        dtheta,
        q,
        used_neumann,
        solve_residual,
    })
}
