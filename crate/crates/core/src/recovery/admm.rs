//! ADMM for the generalized LASSO `min ½‖A x − b‖² + λ‖F x‖₁`, split as
//! `F x − z = 0` with scaled dual `u`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::assemble::SubproblemMatrices;
use super::{RecoveryConfig, ZUpdate};
use crate::error::{Error, Result};

/// Soft thresholding.
#[inline]
pub fn shrink(value: f64, threshold: f64) -> f64 {
    debug_assert!(threshold >= 0.0);
    if value > threshold {
        value - threshold
    } else if value < -threshold {
        value + threshold
    } else {
        0.0
    }
}

#[derive(Clone, Debug)]
pub struct GlassoSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Both stopping criteria met before `admm_max_iter`.
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Factors `AᵀA + s FᵀF`, retrying once with `1e-12·trace` on the diagonal.
fn factor_system(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Ok(ch);
    }
    let jitter = 1e-12 * m.trace();
    let mut shifted = m.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += jitter;
    }
    if jitter > 0.0 {
        if let Some(ch) = Cholesky::new(shifted) {
            log::debug!("subproblem system needed diagonal jitter {jitter:.3e}");
            return Ok(ch);
        }
    }
    let eig = SymmetricEigen::new(m).eigenvalues;
    let hi = eig.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let lo = eig.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    Err(Error::Singular {
        condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
    })
}

/// Solves one subproblem from `warm_start` (`x⁰`, with `z⁰ = F x⁰`, `u⁰ = 0`).
///
/// Stops once `‖F x − z‖ < ε₁` and `‖Fᵀ(z − z_prev)‖ < ε₂`, or after
/// `admm_max_iter` iterations (reported through `converged`).
pub fn solve_glasso(
    m: &SubproblemMatrices,
    lambda: f64,
    cfg: &RecoveryConfig,
    warm_start: &[f64],
) -> Result<GlassoSolution> {
    let mut s = cfg.admm_penalty;
    if cfg.admm_penalty_relative {
        let ratio = m.a.norm_squared() / m.f.norm_squared();
        if ratio.is_finite() && ratio > 0.0 {
            s *= ratio;
        }
    }
    let system = m.a.tr_mul(&m.a) + m.f.tr_mul(&m.f) * s;
    let chol = factor_system(system)?;
    let atb = m.a.tr_mul(&m.b);
    let threshold = lambda / s;

    let mut x = DVector::from_column_slice(warm_start);
    let mut z = &m.f * &x;
    let mut u = DVector::zeros(z.len());
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    for it in 1..=cfg.admm_max_iter {
        let rhs = &atb + m.f.tr_mul(&(&z - &u)) * s;
        x = chol.solve(&rhs);
        let fx = &m.f * &x;
        let z_new = match cfg.z_update {
            ZUpdate::Textbook => (&fx + &u).map(|v| shrink(v, threshold)),
            ZUpdate::AsPrinted => (&fx + &z + &u).map(|v| shrink(v, threshold)),
        };
        u += &fx - &z_new;
        primal = (&fx - &z_new).norm();
        dual = m.f.tr_mul(&(&z_new - &z)).norm();
        z = z_new;
        if primal < cfg.admm_tol_primal && dual < cfg.admm_tol_dual {
            return Ok(GlassoSolution {
                x: x.as_slice().to_vec(),
                iterations: it,
                converged: true,
                primal_residual: primal,
                dual_residual: dual,
            });
        }
        if !primal.is_finite() {
            break;
        }
    }
    Ok(GlassoSolution {
        x: x.as_slice().to_vec(),
        iterations: cfg.admm_max_iter,
        converged: false,
        primal_residual: primal,
        dual_residual: dual,
    })
}
