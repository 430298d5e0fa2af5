//! Low-rank + sparse tensor recovery.
//!
//! Minimizes `½‖P_Ω(X − Y)‖² + λ Σ_α |⟨X, W_α⟩|` over rank-`r` CP tensors `X`
//! by alternating minimization: each sweep updates the factor of mode
//! `1..d` in turn, solving the convex mode subproblem with ADMM.

mod admm;
mod assemble;

use std::collections::HashSet;
use std::sync::Arc;

pub use admm::{shrink, solve_glasso, GlassoSolution};
pub use assemble::{
    assemble_subproblem, coefficients_from_grams, extract_coefficients, mode_grams, objective,
    untouched_nodes, SubproblemMatrices,
};

use crate::cptensor::CpFactors;
use crate::error::{Error, Result};
use crate::gpc::{BasisSet, GpcExpansion};
use crate::sampling::SampleData;

/// Argument of the soft threshold in the ADMM `z` update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZUpdate {
    /// `z = shrink(F x + u)`.
    #[default]
    Textbook,
    /// `z = shrink(F x + z + u)`; kept for comparison, it has no fixed point
    /// at the LASSO optimum and does not converge.
    AsPrinted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    pub rank: usize,
    pub lambda: f64,
    /// Augmented-Lagrangian parameter `s`.
    pub admm_penalty: f64,
    /// Multiply `s` by `‖A‖_F² / ‖F‖_F²` of each subproblem.
    pub admm_penalty_relative: bool,
    pub admm_tol_primal: f64,
    pub admm_tol_dual: f64,
    pub admm_max_iter: usize,
    pub outer_tol_tensor: f64,
    pub outer_tol_gpc: f64,
    pub outer_tol_cost: f64,
    pub outer_max_iter: usize,
    pub init_seed: u64,
    /// `None` derives `(mean |y|)^(1/d)` from the training samples.
    pub init_scale: Option<f64>,
    /// Entries start at `scale·(1 + spread·u)` with `u` uniform on `[-1, 1]`;
    /// `None` draws them uniformly from `[-scale, scale]` instead.
    pub init_spread: Option<f64>,
    /// Proximal weight `τ₀`: each mode solve adds `τ/2 ‖x − x_prev‖²` with
    /// `τ = τ₀ ‖A‖_F² / (n r)`. Zero gives plain alternating minimization.
    pub prox_weight: f64,
    pub z_update: ZUpdate,
}

impl RecoveryConfig {
    /// Defaults for a basis of `basis_len` functions: `s = max(λ, 1)`,
    /// `ε₁ = ε₂ = 1e-6·sqrt(K)`, outer thresholds `1e-4`, 200 sweeps.
    pub fn new(rank: usize, lambda: f64, basis_len: usize) -> Self {
        let tol = 1e-6 * (basis_len as f64).sqrt();
        RecoveryConfig {
            rank,
            lambda,
            admm_penalty: lambda.max(1.0),
            admm_penalty_relative: true,
            admm_tol_primal: tol,
            admm_tol_dual: tol,
            admm_max_iter: 5000,
            outer_tol_tensor: 1e-4,
            outer_tol_gpc: 1e-4,
            outer_tol_cost: 1e-4,
            outer_max_iter: 200,
            init_seed: 0,
            init_scale: None,
            init_spread: Some(0.1),
            prox_weight: 1e-3,
            z_update: ZUpdate::Textbook,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("invalid recovery setting: {what}")));
        if self.rank == 0 {
            return bad("rank must be >= 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and >= 0");
        }
        if !(self.admm_penalty > 0.0 && self.admm_penalty.is_finite()) {
            return bad("admm_penalty must be > 0");
        }
        for (name, v) in [
            ("admm_tol_primal", self.admm_tol_primal),
            ("admm_tol_dual", self.admm_tol_dual),
            ("outer_tol_tensor", self.outer_tol_tensor),
            ("outer_tol_gpc", self.outer_tol_gpc),
            ("outer_tol_cost", self.outer_tol_cost),
        ] {
            if !(v > 0.0) {
                return bad(&format!("{name} must be > 0"));
            }
        }
        if self.admm_max_iter == 0 {
            return bad("admm_max_iter must be >= 1");
        }
        if let Some(s) = self.init_scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad("init_scale must be > 0");
            }
        }
        if let Some(s) = self.init_spread {
            if !(s >= 0.0 && s.is_finite()) {
                return bad("init_spread must be >= 0");
            }
        }
        if !(self.prox_weight >= 0.0 && self.prox_weight.is_finite()) {
            return bad("prox_weight must be >= 0");
        }
        Ok(())
    }
}

/// Metrics of one outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    pub eps_tensor: f64,
    pub eps_gpc: f64,
    pub eps_cost: f64,
    /// ADMM iterations spent on each mode during this sweep.
    pub inner_iterations: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConvergenceRecord {
    /// Cost at the initial guess.
    pub initial_cost: f64,
    pub rows: Vec<IterationRecord>,
}

impl ConvergenceRecord {
    /// `f_0, f_1, ...`.
    pub fn costs(&self) -> Vec<f64> {
        std::iter::once(self.initial_cost)
            .chain(self.rows.iter().map(|r| r.cost))
            .collect()
    }

    pub fn iterations(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub factors: CpFactors,
    pub coeffs: GpcExpansion,
    pub history: ConvergenceRecord,
    pub prediction_error: Option<f64>,
    pub terminated_by: Termination,
    /// Modes with grid nodes that no training sample touches, as `(mode, node)`, 0-based.
    pub undersampled: Vec<(usize, usize)>,
}

/// Relative changes `(ε_tensor, ε_gPC, ε_cost)` between consecutive sweeps.
/// A zero denominator yields `+∞`.
pub fn convergence_metrics(
    prev: &CpFactors,
    curr: &CpFactors,
    prev_c: &[f64],
    curr_c: &[f64],
    prev_f: f64,
    curr_f: f64,
) -> (f64, f64, f64) {
    let ratio = |num: f64, den: f64| if den == 0.0 { f64::INFINITY } else { num / den };
    let diff_sq: f64 = prev
        .factors()
        .iter()
        .zip(curr.factors())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
        .sum();
    let eps_tensor = ratio(diff_sq, prev.squared_norm()).sqrt();
    let c_diff: f64 = prev_c
        .iter()
        .zip(curr_c)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let c_norm = prev_c.iter().map(|c| c * c).sum::<f64>().sqrt();
    let eps_gpc = ratio(c_diff, c_norm);
    let eps_cost = ratio((curr_f - prev_f).abs(), prev_f.abs());
    (eps_tensor, eps_gpc, eps_cost)
}

/// Weighted relative mismatch on held-out samples:
/// `sqrt(Σ (x_i − y_i)² w_i / Σ y_i² w_i)` with `w_i = Π_k w_k^{i_k}`.
pub fn prediction_error(x: &CpFactors, validation: &SampleData, basis: &BasisSet) -> Result<f64> {
    if validation.is_empty() {
        return Err(Error::Config("validation set is empty".into()));
    }
    validation.check_bounds(x.dim(), x.points())?;
    let (mut num, mut den) = (0.0, 0.0);
    for (idx, y) in validation.iter() {
        let w = basis.grid_weight(&idx.0);
        let e = x.entry(&idx.0) - y;
        num += e * e * w;
        den += y * y * w;
    }
    if den == 0.0 {
        return Err(Error::UndefinedPredictionError);
    }
    Ok((num / den).sqrt())
}

/// Fits a rank-`cfg.rank` CP tensor to the training samples and extracts the
/// implied expansion. Deterministic for a fixed `cfg.init_seed`.
pub fn recover(
    samples: &SampleData,
    basis: &Arc<BasisSet>,
    cfg: &RecoveryConfig,
    validation: Option<&SampleData>,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let (d, n) = (basis.dim(), basis.points());
    samples.check_bounds(d, n)?;
    if let Some(v) = validation {
        v.check_bounds(d, n)?;
        let train: HashSet<_> = samples.indices().iter().collect();
        if let Some(dup) = v.indices().iter().find(|i| train.contains(i)) {
            return Err(Error::Config(format!(
                "validation index {dup} is also a training index"
            )));
        }
    }

    let mut undersampled = Vec::new();
    for k in 0..d {
        for i in untouched_nodes(samples, k, n) {
            log::warn!("mode {} node {} is not touched by any sample", k + 1, i + 1);
            undersampled.push((k, i));
        }
    }

    let scale = cfg.init_scale.unwrap_or_else(|| {
        let mean_abs = samples.values().iter().map(|v| v.abs()).sum::<f64>() / samples.len() as f64;
        if mean_abs > 0.0 {
            mean_abs.powf(1.0 / d as f64)
        } else {
            1.0
        }
    });
    let mut x = match cfg.init_spread {
        None => CpFactors::random_uniform(d, n, cfg.rank, scale, cfg.init_seed),
        Some(spread) => {
            let u = CpFactors::random_uniform(d, n, cfg.rank, 1.0, cfg.init_seed);
            let f = u
                .factors()
                .iter()
                .map(|col| col.iter().map(|e| scale * (1.0 + spread * e)).collect())
                .collect();
            CpFactors::new(n, cfg.rank, f)?
        }
    };
    let r = cfg.rank;
    let cost_of = |x: &CpFactors, c: &[f64]| {
        x.project_residual(samples) + cfg.lambda * c.iter().map(|v| v.abs()).sum::<f64>()
    };

    let mut grams = mode_grams(&x, basis);
    let mut coeffs = coefficients_from_grams(&grams, basis, r);
    let mut cost = cost_of(&x, &coeffs);
    if !cost.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut history = ConvergenceRecord {
        initial_cost: cost,
        rows: Vec::new(),
    };
    let mut terminated_by = Termination::MaxIterations;

    for l in 1..=cfg.outer_max_iter {
        let prev = x.clone();
        let mut inner = Vec::with_capacity(d);
        for k in 0..d {
            let mut m = assemble::assemble_with_grams(k, &x, samples, basis, &grams);
            if cfg.prox_weight > 0.0 {
                m = m.with_proximal(cfg.prox_weight, x.factor(k));
            }
            let sol = solve_glasso(&m, cfg.lambda, cfg, x.factor(k))?;
            if !sol.converged {
                log::debug!(
                    "sweep {l} mode {}: ADMM stopped at the iteration cap (primal {:.3e}, dual {:.3e})",
                    k + 1,
                    sol.primal_residual,
                    sol.dual_residual
                );
            }
            inner.push(sol.iterations);
            if sol.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { iteration: l });
            }
            x.set_factor(k, sol.x);
            grams[k] = assemble::mode_gram(&x, basis, k);
        }
        let new_coeffs = coefficients_from_grams(&grams, basis, r);
        let new_cost = cost_of(&x, &new_coeffs);
        if !new_cost.is_finite() {
            return Err(Error::Divergence { iteration: l });
        }
        let (eps_tensor, eps_gpc, eps_cost) =
            convergence_metrics(&prev, &x, &coeffs, &new_coeffs, cost, new_cost);
        history.rows.push(IterationRecord {
            iteration: l,
            cost: new_cost,
            eps_tensor,
            eps_gpc,
            eps_cost,
            inner_iterations: inner,
        });
        coeffs = new_coeffs;
        cost = new_cost;
        if eps_tensor < cfg.outer_tol_tensor
            && eps_gpc < cfg.outer_tol_gpc
            && eps_cost < cfg.outer_tol_cost
        {
            terminated_by = Termination::Converged;
            break;
        }
    }

    let prediction_error = match validation {
        Some(v) if !v.is_empty() => Some(prediction_error(&x, v, basis)?),
        _ => None,
    };
    Ok(RecoveryResult {
        coeffs: GpcExpansion::new(basis.clone(), coeffs)?,
        factors: x,
        history,
        prediction_error,
        terminated_by,
        undersampled,
    })
}
