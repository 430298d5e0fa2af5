//! Mode-`k` subproblem in generalized-LASSO form
//! `min_x ½‖A x − b‖² + λ‖F x‖₁` with `x = vec(U^(k))`.

use nalgebra::{DMatrix, DVector};

use crate::cptensor::CpFactors;
use crate::error::{Error, Result};
use crate::gpc::{BasisSet, GpcExpansion};
use crate::sampling::SampleData;

use std::sync::Arc;

/// Gram blocks `G_k(j, a) = ⟨u_k^j, v_k^a⟩`, laid out `j * (p + 1) + a`.
pub fn mode_grams(x: &CpFactors, basis: &BasisSet) -> Vec<Vec<f64>> {
    (0..x.dim()).map(|k| mode_gram(x, basis, k)).collect()
}

pub(crate) fn mode_gram(x: &CpFactors, basis: &BasisSet, k: usize) -> Vec<f64> {
    let (n, r, p1) = (x.points(), x.rank(), basis.order() + 1);
    let u = x.factor(k);
    let mut g = vec![0.0; r * p1];
    for j in 0..r {
        for a in 0..p1 {
            g[j * p1 + a] = (0..n)
                .map(|i| u[j * n + i] * basis.weight_factor(k, i, a))
                .sum();
        }
    }
    g
}

/// `c_α = Σ_j Π_k G_k(j, α_k)` for every basis index, from precomputed grams.
pub fn coefficients_from_grams(grams: &[Vec<f64>], basis: &BasisSet, r: usize) -> Vec<f64> {
    let p1 = basis.order() + 1;
    let d = basis.dim();
    let mut dense = vec![0usize; d];
    basis
        .indices()
        .iter()
        .map(|alpha| {
            for &(k, a) in alpha.terms() {
                dense[k] = a;
            }
            let c = (0..r)
                .map(|j| {
                    grams
                        .iter()
                        .zip(&dense)
                        .map(|(g, a)| g[j * p1 + a])
                        .product::<f64>()
                })
                .sum();
            for &(k, _) in alpha.terms() {
                dense[k] = 0;
            }
            c
        })
        .collect()
}

/// Coefficients `c_α = ⟨X, W_α⟩` of the expansion implied by a CP tensor.
pub fn extract_coefficients(x: &CpFactors, basis: &Arc<BasisSet>) -> Result<GpcExpansion> {
    check_shapes(x, basis)?;
    let grams = mode_grams(x, basis);
    GpcExpansion::new(
        basis.clone(),
        coefficients_from_grams(&grams, basis, x.rank()),
    )
}

pub(crate) fn check_shapes(x: &CpFactors, basis: &BasisSet) -> Result<()> {
    if x.dim() != basis.dim() || x.points() != basis.points() {
        return Err(Error::Config(format!(
            "CP tensor is {}-way with {} points, basis is {}-way with {}",
            x.dim(),
            x.points(),
            basis.dim(),
            basis.points()
        )));
    }
    Ok(())
}

/// `½‖P_Ω(X − Y)‖² + λ Σ_α |⟨X, W_α⟩|`, all in factored form.
pub fn objective(x: &CpFactors, samples: &SampleData, basis: &BasisSet, lambda: f64) -> f64 {
    let fit = x.project_residual(samples);
    if lambda == 0.0 {
        return fit;
    }
    let grams = mode_grams(x, basis);
    let l1: f64 = coefficients_from_grams(&grams, basis, x.rank())
        .iter()
        .map(|c| c.abs())
        .sum();
    fit + lambda * l1
}

/// `A` (`|Ω| × nr`), `F` (`K × nr`) and `b` (`|Ω|`) of one mode subproblem.
#[derive(Clone, Debug)]
pub struct SubproblemMatrices {
    pub a: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub b: DVector<f64>,
    pub n: usize,
    pub r: usize,
}

impl SubproblemMatrices {
    /// `½‖A x − b‖² + λ‖F x‖₁`.
    pub fn objective(&self, x: &[f64], lambda: f64) -> f64 {
        let x = DVector::from_column_slice(x);
        let res = &self.a * &x - &self.b;
        0.5 * res.norm_squared() + lambda * (&self.f * &x).lp_norm(1)
    }

    /// Appends `√τ I` to `A` and `√τ x_prev` to `b`, with
    /// `τ = weight ‖A‖_F² / (n r)`.
    pub fn with_proximal(self, weight: f64, x_prev: &[f64]) -> Self {
        let cols = self.a.ncols();
        let rows = self.a.nrows();
        assert_eq!(x_prev.len(), cols, "previous iterate length");
        let root = (weight * self.a.norm_squared() / cols as f64).sqrt();
        let mut a = self.a.resize_vertically(rows + cols, 0.0);
        let mut b = self.b.resize_vertically(rows + cols, 0.0);
        for (i, v) in x_prev.iter().enumerate() {
            a[(rows + i, i)] = root;
            b[rows + i] = root * v;
        }
        SubproblemMatrices { a, b, ..self }
    }
}

/// Builds the mode-`k` (0-based) subproblem around the current factors.
///
/// Row `s` of `A` holds `μ_{s,j} = Π_{k'≠k} U^(k')(i_{k'}, j)` at column
/// `j n + i_k`; row `α` of `F` holds `ν_{α,j} v_k^{α_k}(i)` at column `j n + i`
/// with `ν_{α,j} = Π_{k'≠k} ⟨u_{k'}^j, v_{k'}^{α_{k'}}⟩`.
pub fn assemble_subproblem(
    k: usize,
    current: &CpFactors,
    samples: &SampleData,
    basis: &BasisSet,
) -> Result<SubproblemMatrices> {
    check_shapes(current, basis)?;
    let d = current.dim();
    if k >= d {
        return Err(Error::IndexOutOfBounds(format!("mode {} of {d}", k + 1)));
    }
    samples.check_bounds(d, current.points())?;
    let grams = mode_grams(current, basis);
    Ok(assemble_with_grams(k, current, samples, basis, &grams))
}

pub(crate) fn assemble_with_grams(
    k: usize,
    current: &CpFactors,
    samples: &SampleData,
    basis: &BasisSet,
    grams: &[Vec<f64>],
) -> SubproblemMatrices {
    let (n, r) = (current.points(), current.rank());
    let p1 = basis.order() + 1;
    let d = current.dim();

    let mut a = DMatrix::zeros(samples.len(), n * r);
    let mut b = DVector::zeros(samples.len());
    for (s, (idx, y)) in samples.iter().enumerate() {
        b[s] = y;
        let ik = idx.0[k];
        for j in 0..r {
            let mut mu = 1.0;
            for (kk, i) in idx.0.iter().enumerate() {
                if kk != k {
                    mu *= current.get(kk, *i, j);
                }
            }
            a[(s, j * n + ik)] = mu;
        }
    }

    let mut f = DMatrix::zeros(basis.len(), n * r);
    let mut dense = vec![0usize; d];
    for (row, alpha) in basis.indices().iter().enumerate() {
        for &(kk, deg) in alpha.terms() {
            dense[kk] = deg;
        }
        let ak = dense[k];
        for j in 0..r {
            let mut nu = 1.0;
            for (kk, g) in grams.iter().enumerate() {
                if kk != k {
                    nu *= g[j * p1 + dense[kk]];
                }
            }
            for i in 0..n {
                f[(row, j * n + i)] = nu * basis.weight_factor(k, i, ak);
            }
        }
        for &(kk, _) in alpha.terms() {
            dense[kk] = 0;
        }
    }
    SubproblemMatrices { a, f, b, n, r }
}

/// Grid nodes of mode `k` that no sample touches.
pub fn untouched_nodes(samples: &SampleData, k: usize, n: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    for idx in samples.indices() {
        seen[idx.0[k]] = true;
    }
    (0..n).filter(|i| !seen[*i]).collect()
}
