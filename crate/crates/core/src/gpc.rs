//! Multivariate polynomial-chaos basis, weight-tensor factors, expansions and
//! their statistics.
//!
//! Basis functions are products `Ψ_α(x) = Π_k φ_{k,α_k}(x_k)` over all
//! multi-indices with total degree `|α| <= p`. They are ordered by ascending
//! total degree and, within one total degree, by descending lexicographic
//! order of the dense index vector: `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::orthopoly::{build_recurrence, gauss_rule, DensitySpec, QuadRule1D, Recurrence1D};
use crate::rng;

/// Multi-index stored sparsely as `(parameter, degree)` pairs with nonzero
/// degree, sorted by parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    d: usize,
    terms: Vec<(usize, usize)>,
}

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex {
            d,
            terms: Vec::new(),
        }
    }

    pub fn from_dense(alpha: &[usize]) -> Self {
        MultiIndex {
            d: alpha.len(),
            terms: alpha
                .iter()
                .enumerate()
                .filter(|(_, a)| **a > 0)
                .map(|(k, a)| (k, *a))
                .collect(),
        }
    }

    /// Builds from `(parameter, degree)` pairs; zero degrees are dropped and
    /// repeated parameters accumulate.
    pub fn from_terms(d: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut dense = vec![0; d];
        for &(k, a) in pairs {
            if k >= d {
                return Err(Error::IndexOutOfBounds(format!(
                    "parameter {} of a {d}-dimensional index",
                    k + 1
                )));
            }
            dense[k] += a;
        }
        Ok(Self::from_dense(&dense))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[(usize, usize)] {
        &self.terms
    }

    pub fn degree(&self, k: usize) -> usize {
        self.terms
            .iter()
            .find(|(j, _)| *j == k)
            .map_or(0, |(_, a)| *a)
    }

    pub fn total(&self) -> usize {
        self.terms.iter().map(|(_, a)| a).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self) -> Vec<usize> {
        let mut out = vec![0; self.d];
        for &(k, a) in &self.terms {
            out[k] = a;
        }
        out
    }
}

/// `(p + d)! / (p! d!)` with overflow checking.
pub fn basis_count(d: usize, p: usize) -> Result<usize> {
    let mut c: u128 = 1;
    for i in 1..=p as u128 {
        c = c
            .checked_mul(d as u128 + i)
            .ok_or_else(|| Error::Overflow(format!("basis size for d={d}, p={p}")))?
            / i;
    }
    usize::try_from(c).map_err(|_| Error::Overflow(format!("basis size for d={d}, p={p}")))
}

/// All multi-indices with `|α| <= p` in basis order.
pub fn enumerate_indices(d: usize, p: usize) -> Result<Vec<MultiIndex>> {
    let k = basis_count(d, p)?;
    let mut out = Vec::with_capacity(k);
    let mut terms = Vec::with_capacity(p);
    for total in 0..=p {
        compositions(d, 0, total, &mut terms, &mut out);
    }
    debug_assert_eq!(out.len(), k);
    Ok(out)
}

fn compositions(
    d: usize,
    start: usize,
    remaining: usize,
    terms: &mut Vec<(usize, usize)>,
    out: &mut Vec<MultiIndex>,
) {
    if remaining == 0 {
        out.push(MultiIndex {
            d,
            terms: terms.clone(),
        });
        return;
    }
    // Descending lexicographic: give the earliest free parameter as much
    // degree as possible first.
    for k in start..d {
        for a in (1..=remaining).rev() {
            terms.push((k, a));
            compositions(d, k + 1, remaining - a, terms, out);
            terms.pop();
        }
    }
}

/// The truncated basis together with quadrature rules and the factors
/// `v_k^a(i) = φ_{k,a}(x_k^i) w_k^i` of every rank-1 weight tensor
/// `W_α = v_1^{α_1} ∘ ... ∘ v_d^{α_d}`.
#[derive(Clone, Debug)]
pub struct BasisSet {
    d: usize,
    p: usize,
    n: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
    densities: Vec<DensitySpec>,
    recurrences: Vec<Recurrence1D>,
    rules: Vec<QuadRule1D>,
    /// Per parameter, `phi[k][i * (p + 1) + a] = φ_{k,a}(x_k^i)`.
    phi: Vec<Vec<f64>>,
    /// Per parameter, `weight_factors[k][i * (p + 1) + a] = φ_{k,a}(x_k^i) w_k^i`.
    weight_factors: Vec<Vec<f64>>,
}

impl BasisSet {
    /// Builds the basis for `d` parameters up to total degree `p`, with an
    /// `n`-point Gauss rule per parameter.
    pub fn new(d: usize, p: usize, densities: Vec<DensitySpec>, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("need at least one parameter".into()));
        }
        if densities.len() != d {
            return Err(Error::Config(format!(
                "{} densities given for {d} parameters",
                densities.len()
            )));
        }
        if n < p + 1 {
            return Err(Error::Config(format!(
                "{n} quadrature points cannot support polynomial degree {p} (need at least {})",
                p + 1
            )));
        }
        let indices = enumerate_indices(d, p)?;
        let positions = indices
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let order = n.max(p);
        let mut recurrences = Vec::with_capacity(d);
        let mut rules = Vec::with_capacity(d);
        let mut phi = Vec::with_capacity(d);
        let mut weight_factors = Vec::with_capacity(d);
        for density in &densities {
            let rec = build_recurrence(density, order)?;
            let rule = gauss_rule(&rec, n)?;
            let mut ph = Vec::with_capacity(n * (p + 1));
            let mut wf = Vec::with_capacity(n * (p + 1));
            for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                for v in rec.eval_all(p, *x)? {
                    ph.push(v);
                    wf.push(v * w);
                }
            }
            recurrences.push(rec);
            rules.push(rule);
            phi.push(ph);
            weight_factors.push(wf);
        }
        Ok(BasisSet {
            d,
            p,
            n,
            indices,
            positions,
            densities,
            recurrences,
            rules,
            phi,
            weight_factors,
        })
    }

    /// Same density for every parameter.
    pub fn isotropic(d: usize, p: usize, density: DensitySpec, n: usize) -> Result<Self> {
        Self::new(d, p, vec![density; d], n)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> usize {
        self.p
    }

    /// Quadrature points per parameter.
    pub fn points(&self) -> usize {
        self.n
    }

    /// Number of basis functions `K`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }

    pub fn densities(&self) -> &[DensitySpec] {
        &self.densities
    }

    pub fn recurrences(&self) -> &[Recurrence1D] {
        &self.recurrences
    }

    pub fn rules(&self) -> &[QuadRule1D] {
        &self.rules
    }

    /// `φ_{k,a}(x_k^i)` at quadrature node `i` (0-based).
    pub fn phi_at_node(&self, k: usize, i: usize, a: usize) -> f64 {
        self.phi[k][i * (self.p + 1) + a]
    }

    /// Entry `i` of `v_k^a`.
    pub fn weight_factor(&self, k: usize, i: usize, a: usize) -> f64 {
        self.weight_factors[k][i * (self.p + 1) + a]
    }

    /// The column `v_k^a` as an owned vector of length `n`.
    pub fn weight_column(&self, k: usize, a: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.weight_factor(k, i, a)).collect()
    }

    /// The `d` vectors whose outer product is `W_α`.
    pub fn weight_vectors(&self, alpha: &MultiIndex) -> Vec<Vec<f64>> {
        (0..self.d)
            .map(|k| self.weight_column(k, alpha.degree(k)))
            .collect()
    }

    /// `Ψ_α(point)`.
    pub fn eval(&self, alpha: &MultiIndex, point: &[f64]) -> Result<f64> {
        assert_eq!(point.len(), self.d, "point dimension");
        let mut v = 1.0;
        for &(k, a) in alpha.terms() {
            v *= *self.recurrences[k]
                .eval_all(a, point[k])?
                .last()
                .expect("nonempty");
        }
        Ok(v)
    }

    /// `φ_{k,0..=p}(point_k)` for every parameter, laid out `k * (p + 1) + a`.
    fn univariate_table(&self, point: &[f64]) -> Vec<f64> {
        let mut table = Vec::with_capacity(self.d * (self.p + 1));
        for (rec, x) in self.recurrences.iter().zip(point) {
            table.extend(
                rec.eval_all(self.p, *x)
                    .expect("order >= p by construction"),
            );
        }
        table
    }

    /// Product quadrature weight of a grid index (0-based components).
    pub fn grid_weight(&self, index: &[usize]) -> f64 {
        index
            .iter()
            .zip(&self.rules)
            .map(|(i, r)| r.weights()[*i])
            .product()
    }

    /// Grid point of a grid index (0-based components).
    pub fn grid_point(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .zip(&self.rules)
            .map(|(i, r)| r.nodes()[*i])
            .collect()
    }
}

/// Largest tensor-product grid the full projection will walk.
pub const FULL_GRID_LIMIT: usize = 10_000_000;

/// Coefficients `c_α = Σ_i y(x_i) Ψ_α(x_i) w_i` over the complete tensor grid.
///
/// Exponential in `d`; guarded at [`FULL_GRID_LIMIT`] points. This is the
/// classical collocation reference the recovery path is checked against.
pub fn full_grid_projection(
    basis: &BasisSet,
    mut y: impl FnMut(&[usize]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let d = basis.dim();
    let n = basis.points();
    let total = grid_size(n, d)
        .filter(|t| *t <= FULL_GRID_LIMIT)
        .ok_or_else(|| Error::ScaleGuard {
            entries: format!("{n}^{d}"),
            limit: FULL_GRID_LIMIT,
        })?;
    let p1 = basis.order() + 1;
    let mut coeffs = vec![0.0; basis.len()];
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let value = y(&idx)? * basis.grid_weight(&idx);
        for (c, alpha) in coeffs.iter_mut().zip(basis.indices()) {
            let mut psi = 1.0;
            for &(k, a) in alpha.terms() {
                psi *= basis.phi[k][idx[k] * p1 + a];
            }
            *c += value * psi;
        }
        // Row-major increment, last component fastest.
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(coeffs)
}

/// `n^d` when it fits in `usize`.
pub fn grid_size(n: usize, d: usize) -> Option<usize> {
    let mut t: usize = 1;
    for _ in 0..d {
        t = t.checked_mul(n)?;
    }
    Some(t)
}

/// A truncated expansion `y(x) ≈ Σ_α c_α Ψ_α(x)`.
#[derive(Clone, Debug)]
pub struct GpcExpansion {
    basis: Arc<BasisSet>,
    coeffs: Vec<f64>,
}

impl GpcExpansion {
    pub fn new(basis: Arc<BasisSet>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Format(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                basis.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Format(format!(
                "coefficient {} is not finite",
                i + 1
            )));
        }
        Ok(GpcExpansion { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.basis.dim(), "point dimension");
        let p1 = self.basis.order() + 1;
        let table = self.basis.univariate_table(point);
        self.basis
            .indices()
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(alpha, c)| {
                c * alpha
                    .terms()
                    .iter()
                    .map(|&(k, a)| table[k * p1 + a])
                    .product::<f64>()
            })
            .sum()
    }

    /// Mean and variance from orthonormality: `c_0` and `Σ_{α≠0} c_α²`.
    pub fn moments(&self) -> (f64, f64) {
        let mean = self.coeffs[0];
        let var = self.coeffs[1..].iter().map(|c| c * c).sum();
        (mean, var)
    }

    /// Samples the expansion under the product density and bins the values.
    ///
    /// Fails only when some parameter density cannot be sampled.
    pub fn density_histogram(&self, draws: usize, bins: usize, seed: u64) -> Result<Histogram> {
        let values = sample_outputs(self.basis.densities(), draws, seed, |x| Ok(self.eval(x)))?;
        Histogram::from_values(&values, bins)
    }
}

/// Draws `draws` parameter vectors from the product density and maps each
/// through `f`.
pub fn sample_outputs(
    densities: &[DensitySpec],
    draws: usize,
    seed: u64,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut rng = rng::seeded(seed);
    let mut point = vec![0.0; densities.len()];
    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        for (x, density) in point.iter_mut().zip(densities) {
            *x = density
                .sample(&mut rng)
                .ok_or_else(|| Error::InvalidDensity("custom density has no sampler".into()))?;
        }
        out.push(f(&point)?);
    }
    Ok(out)
}

/// Equal-width histogram normalized to unit area.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    /// Bins over `[min, max]` of the values. A degenerate range produces a
    /// single unit-width bin centered on the value.
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() || bins == 0 {
            return Err(Error::Config(
                "histogram needs draws >= 1 and bins >= 1".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite value in histogram input".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / bins as f64;
        if !(width > 0.0) || lo + width == lo {
            return Ok(Histogram {
                edges: vec![lo - 0.5, lo + 0.5],
                density: vec![1.0],
            });
        }
        let edges: Vec<f64> = (0..=bins)
            .map(|b| if b == bins { hi } else { lo + b as f64 * width })
            .collect();
        let mut counts = vec![0usize; bins];
        for v in values {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let scale = 1.0 / (values.len() as f64 * width);
        Ok(Histogram {
            edges,
            density: counts.into_iter().map(|c| c as f64 * scale).collect(),
        })
    }

    /// Bins `values` on fixed `edges`, normalized by the total number of
    /// values; values outside the edges count toward the total only.
    pub fn from_values_on(values: &[f64], edges: &[f64]) -> Result<Self> {
        if values.is_empty() || edges.len() < 2 {
            return Err(Error::Config(
                "histogram needs draws >= 1 and bins >= 1".into(),
            ));
        }
        if edges.windows(2).any(|e| !(e[1] > e[0])) {
            return Err(Error::Format("histogram edges must increase".into()));
        }
        let bins = edges.len() - 1;
        let mut counts = vec![0usize; bins];
        for &v in values {
            if !v.is_finite() {
                return Err(Error::Format("non-finite value in histogram input".into()));
            }
            if v < edges[0] || v > edges[bins] {
                continue;
            }
            let b = edges[1..].partition_point(|e| *e < v).min(bins - 1);
            counts[b] += 1;
        }
        let total = values.len() as f64;
        Ok(Histogram {
            edges: edges.to_vec(),
            density: counts
                .iter()
                .zip(edges.windows(2))
                .map(|(c, e)| *c as f64 / (total * (e[1] - e[0])))
                .collect(),
        })
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    /// Density at `x`; zero outside the binned range.
    pub fn density_at(&self, x: f64) -> f64 {
        let n = self.density.len();
        if x < self.edges[0] || x > self.edges[n] {
            return 0.0;
        }
        let b = self.edges[1..].partition_point(|e| *e < x).min(n - 1);
        self.density[b]
    }

    /// `Σ density * width`, one for any histogram built from data.
    pub fn total_mass(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(p, e)| p * (e[1] - e[0]))
            .sum()
    }

    /// Largest density gap, probed at the bin centers of both histograms.
    pub fn sup_difference(&self, other: &Histogram) -> f64 {
        self.centers()
            .chain(other.centers())
            .map(|x| (self.density_at(x) - other.density_at(x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_basis(d: usize, p: usize) -> Arc<BasisSet> {
        Arc::new(BasisSet::isotropic(d, p, DensitySpec::standard_gaussian(), p + 1).unwrap())
    }

    #[test]
    fn fixed_edges_binning() {
        let h =
            Histogram::from_values_on(&[0.1, 0.2, 0.9, 1.5, 5.0], &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert_eq!(h.density, vec![0.8, 0.4, 0.2]);
        assert!((h.total_mass() - 0.8).abs() < 1e-15);
        assert!(Histogram::from_values_on(&[0.1], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn published_basis_sizes() {
        assert_eq!(basis_count(57, 2).unwrap(), 1711);
        assert_eq!(basis_count(41, 2).unwrap(), 903);
        assert_eq!(basis_count(46, 2).unwrap(), 1128);
        assert_eq!(basis_count(20, 2).unwrap(), 231);
        assert!(matches!(
            basis_count(usize::MAX, 3),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn small_enumeration_order() {
        let idx = enumerate_indices(2, 1).unwrap();
        let dense: Vec<_> = idx.iter().map(|m| m.to_dense()).collect();
        assert_eq!(dense, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        let idx = enumerate_indices(3, 2).unwrap();
        let dense: Vec<_> = idx.iter().map(|m| m.to_dense()).collect();
        assert_eq!(
            dense,
            vec![
                vec![0, 0, 0],
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2],
            ]
        );
    }

    #[test]
    fn enumeration_counts_up_to_sixty_parameters() {
        for d in (1..=60).step_by(7).chain([60]) {
            for p in 0..=4 {
                let idx = enumerate_indices(d, p).unwrap();
                assert_eq!(idx.len(), basis_count(d, p).unwrap());
                assert!(idx[0].is_zero());
                assert!(idx.windows(2).all(|w| w[0].total() <= w[1].total()));
            }
        }
    }

    #[test]
    fn rejects_too_few_points() {
        let err = BasisSet::isotropic(2, 2, DensitySpec::standard_gaussian(), 2).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn basis_eval_examples() {
        let basis = gauss_basis(2, 2);
        let zero = MultiIndex::zero(2);
        assert_eq!(basis.eval(&zero, &[0.3, -7.0]).unwrap(), 1.0);
        let (a, b) = (0.7, -1.3);
        let v = basis
            .eval(&MultiIndex::from_dense(&[1, 1]), &[a, b])
            .unwrap();
        assert!((v - a * b).abs() < 1e-15);
        let v = basis
            .eval(&MultiIndex::from_dense(&[2, 0]), &[1.0, 4.2])
            .unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn expansion_examples() {
        let basis = gauss_basis(1, 2);
        let e = GpcExpansion::new(basis.clone(), vec![0.0, 1.0, 0.0]).unwrap();
        assert!((e.eval(&[3.0]) - 3.0).abs() < 1e-15);
        let c = GpcExpansion::new(basis.clone(), vec![2.0, 0.0, 0.0]).unwrap();
        assert_eq!(c.eval(&[-1.5]), 2.0);
        assert_eq!(c.moments(), (2.0, 0.0));
        assert!(GpcExpansion::new(basis.clone(), vec![1.0]).is_err());
        assert!(GpcExpansion::new(basis, vec![1.0, f64::NAN, 0.0]).is_err());

        let b3 = gauss_basis(3, 2);
        let mut coeffs = vec![0.0; b3.len()];
        coeffs[0] = 1.0;
        coeffs[5] = 3.0;
        let e = GpcExpansion::new(b3, coeffs).unwrap();
        assert_eq!(e.moments(), (1.0, 9.0));
    }

    #[test]
    fn weight_factors_are_phi_times_weight() {
        let basis = gauss_basis(3, 2);
        for k in 0..3 {
            let rule = &basis.rules()[k];
            for i in 0..3 {
                for a in 0..=2 {
                    let phi = crate::orthopoly::orthonormal_eval(
                        &basis.recurrences()[k],
                        a,
                        rule.nodes()[i],
                    )
                    .unwrap();
                    assert_eq!(basis.weight_factor(k, i, a), phi * rule.weights()[i]);
                }
            }
        }
    }

    #[test]
    fn constant_histogram_has_one_bin() {
        let basis = gauss_basis(2, 1);
        let e = GpcExpansion::new(basis, vec![4.0, 0.0, 0.0]).unwrap();
        let h = e.density_histogram(1000, 20, 1).unwrap();
        assert_eq!(h.bins(), 1);
        assert!(h.edges[0] <= 4.0 && 4.0 <= h.edges[1]);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_is_seed_deterministic_and_normalized() {
        let basis = gauss_basis(2, 2);
        let coeffs: Vec<f64> = (0..basis.len()).map(|i| 1.0 / (i + 1) as f64).collect();
        let e = GpcExpansion::new(basis, coeffs).unwrap();
        let a = e.density_histogram(5000, 30, 9).unwrap();
        let b = e.density_histogram(5000, 30, 9).unwrap();
        assert_eq!(a, b);
        assert!((a.total_mass() - 1.0).abs() < 1e-12);
        let c = e.density_histogram(5000, 30, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn identity_expansion_histogram_is_standard_normal() {
        let basis = gauss_basis(1, 2);
        let e = GpcExpansion::new(basis, vec![0.0, 1.0, 0.0]).unwrap();
        let h = e.density_histogram(100_000, 50, 3).unwrap();
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let sup = h
            .centers()
            .map(|x| (h.density_at(x) - pdf(x)).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 0.05, "sup discrepancy {sup}");
    }
}
