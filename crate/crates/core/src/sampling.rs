//! Sample plans over the tensor-product quadrature grid, simulator oracles,
//! and plan evaluation.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::cptensor::TensorIndex;
use crate::error::{Error, Result};
use crate::gpc::{full_grid_projection, grid_size, BasisSet, GpcExpansion, MultiIndex};
use crate::rng;

/// Observed entries `y_i` of the sample tensor at a list of grid indices.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SampleData {
    indices: Vec<TensorIndex>,
    values: Vec<f64>,
}

impl SampleData {
    pub fn new(indices: Vec<TensorIndex>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Format(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "non-finite value at index {}",
                indices[i]
            )));
        }
        Ok(SampleData { indices, values })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[TensorIndex] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TensorIndex, f64)> + '_ {
        self.indices.iter().zip(self.values.iter().copied())
    }

    /// Fails on the first index that does not fit a `d`-way grid of `n` points.
    pub fn check_bounds(&self, d: usize, n: usize) -> Result<()> {
        match self.indices.iter().find(|i| !i.in_bounds(d, n)) {
            Some(bad) => Err(Error::IndexOutOfBounds(format!(
                "sample {bad} does not fit a {d}-way grid with {n} points"
            ))),
            None => Ok(()),
        }
    }
}

/// Training set `Ω` and disjoint validation set `Ω′`, both in draw order.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    pub d: usize,
    pub n: usize,
    pub omega: Vec<TensorIndex>,
    pub omega_prime: Vec<TensorIndex>,
    pub seed: u64,
}

/// Draws `omega_size + validation_size` distinct grid indices uniformly
/// without replacement. The first `omega_size` form `Ω`.
pub fn draw_plan(
    d: usize,
    n: usize,
    omega_size: usize,
    validation_size: usize,
    seed: u64,
) -> Result<SamplePlan> {
    if d == 0 || n == 0 {
        return Err(Error::Config("plan needs d >= 1 and n >= 1".into()));
    }
    if omega_size == 0 {
        return Err(Error::Config("training set must not be empty".into()));
    }
    let requested = omega_size
        .checked_add(validation_size)
        .ok_or_else(|| Error::Overflow("plan size".into()))?;
    let grid = grid_size(n, d);
    if let Some(g) = grid {
        if requested > g {
            return Err(Error::InfeasiblePlan {
                requested,
                available: g.to_string(),
            });
        }
    }

    let mut g = rng::seeded(seed);
    let mut drawn: Vec<TensorIndex> = Vec::with_capacity(requested);
    match grid {
        // Dense requests on small grids: shuffle the grid instead of rejecting.
        Some(total) if total <= 4 * requested && total <= 10_000_000 => {
            let mut all: Vec<usize> = (0..total).collect();
            let (picked, _) = all.partial_shuffle(&mut g, requested);
            for &flat in picked.iter() {
                drawn.push(unflatten(flat, d, n));
            }
        }
        _ => {
            let mut seen = HashSet::with_capacity(requested);
            while drawn.len() < requested {
                let idx = TensorIndex((0..d).map(|_| g.random_range(0..n)).collect());
                if seen.insert(idx.clone()) {
                    drawn.push(idx);
                }
            }
        }
    }
    let omega_prime = drawn.split_off(omega_size);
    Ok(SamplePlan {
        d,
        n,
        omega: drawn,
        omega_prime,
        seed,
    })
}

fn unflatten(mut flat: usize, d: usize, n: usize) -> TensorIndex {
    let mut idx = vec![0; d];
    for c in idx.iter_mut().rev() {
        *c = flat % n;
        flat /= n;
    }
    TensorIndex(idx)
}

/// Grid point of `idx`: coordinate `k` is node `i_k` of rule `k`.
pub fn index_to_point(basis: &BasisSet, idx: &TensorIndex) -> Vec<f64> {
    basis.grid_point(&idx.0)
}

/// A deterministic black-box function of the `d` parameters.
///
/// Implementations must tolerate concurrent calls.
pub trait Simulator: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn evaluate(&self, point: &[f64]) -> std::result::Result<f64, String>;

    /// Reference coefficients in `basis` order, when the oracle knows them.
    fn true_coefficients(&self, _basis: &BasisSet) -> Option<Vec<f64>> {
        None
    }
}

/// Wraps a closure as a [`Simulator`].
pub struct FnSimulator<F> {
    name: String,
    d: usize,
    f: F,
}

impl<F> FnSimulator<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(name: impl Into<String>, d: usize, f: F) -> Self {
        FnSimulator {
            name: name.into(),
            d,
            f,
        }
    }
}

impl<F> Simulator for FnSimulator<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn evaluate(&self, point: &[f64]) -> std::result::Result<f64, String> {
        Ok((self.f)(point))
    }
}

/// Evaluated training and validation samples of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanSamples {
    pub training: SampleData,
    pub validation: SampleData,
}

/// Runs the oracle at every planned index. Calls may run in parallel; the
/// output order is the plan order regardless.
pub fn evaluate_plan(
    plan: &SamplePlan,
    oracle: &dyn Simulator,
    basis: &BasisSet,
) -> Result<PlanSamples> {
    if oracle.dim() != plan.d || basis.dim() != plan.d {
        return Err(Error::Config(format!(
            "oracle has {} parameters, basis {}, plan {}",
            oracle.dim(),
            basis.dim(),
            plan.d
        )));
    }
    let run = |indices: &[TensorIndex]| -> Result<SampleData> {
        let values = indices
            .par_iter()
            .map(|idx| {
                let point = index_to_point(basis, idx);
                let v = oracle.evaluate(&point).map_err(|message| Error::Oracle {
                    index: idx.to_string(),
                    message,
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Oracle {
                        index: idx.to_string(),
                        message: format!("non-finite output {v}"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        SampleData::new(indices.to_vec(), values)
    };
    Ok(PlanSamples {
        training: run(&plan.omega)?,
        validation: run(&plan.omega_prime)?,
    })
}

/// `y = c0 + Σ a_k x_k + Σ b_kl x_k x_l` (pairs may repeat a parameter).
#[derive(Clone, Debug)]
pub struct SparseQuadratic {
    pub d: usize,
    pub constant: f64,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
}

impl SparseQuadratic {
    /// Seeded random supports and coefficients.
    pub fn random(d: usize, linear_terms: usize, quadratic_terms: usize, seed: u64) -> Self {
        let mut g = rng::seeded(seed);
        let constant = g.random_range(0.5..1.5);
        let linear = (0..linear_terms)
            .map(|_| (g.random_range(0..d), signed(&mut g, 0.1, 1.0)))
            .collect();
        let quadratic = (0..quadratic_terms)
            .map(|_| {
                (
                    g.random_range(0..d),
                    g.random_range(0..d),
                    signed(&mut g, 0.05, 0.5),
                )
            })
            .collect();
        SparseQuadratic {
            d,
            constant,
            linear,
            quadratic,
        }
    }
}

fn signed<R: Rng + ?Sized>(g: &mut R, lo: f64, hi: f64) -> f64 {
    let m = g.random_range(lo..hi);
    if g.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Coefficients of `x` and `x²` in the orthonormal family of one parameter:
/// `x = γ_0 + √κ_1 φ_1` and
/// `x² = γ_0² + κ_1 + √κ_1 (γ_0 + γ_1) φ_1 + √(κ_1 κ_2) φ_2`.
fn monomial_in_phi(basis: &BasisSet, k: usize, power: usize) -> Vec<f64> {
    let rec = &basis.recurrences()[k];
    let (g, kap) = (rec.gamma(), rec.kappa());
    match power {
        0 => vec![1.0],
        1 => vec![g[0], kap[1].sqrt()],
        2 => vec![
            g[0] * g[0] + kap[1],
            kap[1].sqrt() * (g[0] + g[1]),
            (kap[1] * kap[2]).sqrt(),
        ],
        _ => unreachable!("quadratic oracle"),
    }
}

fn add_product(
    basis: &BasisSet,
    coeffs: &mut [f64],
    scale: f64,
    factors: &[(usize, Vec<f64>)],
) -> Option<()> {
    // Expand Π_k (Σ_a g_k[a] φ_{k,a}) into multi-index coefficients.
    let mut combos: Vec<(Vec<(usize, usize)>, f64)> = vec![(Vec::new(), scale)];
    for (k, g) in factors {
        let mut next = Vec::with_capacity(combos.len() * g.len());
        for (terms, c) in &combos {
            for (a, ga) in g.iter().enumerate() {
                if *ga == 0.0 {
                    continue;
                }
                let mut t = terms.clone();
                t.push((*k, a));
                next.push((t, c * ga));
            }
        }
        combos = next;
    }
    for (terms, c) in combos {
        let alpha = MultiIndex::from_terms(basis.dim(), &terms).ok()?;
        coeffs[basis.position(&alpha)?] += c;
    }
    Some(())
}

impl Simulator for SparseQuadratic {
    fn name(&self) -> &str {
        "sparse-quadratic"
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        let mut y = self.constant;
        for &(k, a) in &self.linear {
            y += a * x[k];
        }
        for &(k, l, b) in &self.quadratic {
            y += b * x[k] * x[l];
        }
        Ok(y)
    }

    fn true_coefficients(&self, basis: &BasisSet) -> Option<Vec<f64>> {
        if basis.dim() != self.d || basis.order() < 2 {
            return None;
        }
        let mut c = vec![0.0; basis.len()];
        c[0] += self.constant;
        for &(k, a) in &self.linear {
            add_product(basis, &mut c, a, &[(k, monomial_in_phi(basis, k, 1))])?;
        }
        for &(k, l, b) in &self.quadratic {
            if k == l {
                add_product(basis, &mut c, b, &[(k, monomial_in_phi(basis, k, 2))])?;
            } else {
                add_product(
                    basis,
                    &mut c,
                    b,
                    &[
                        (k, monomial_in_phi(basis, k, 1)),
                        (l, monomial_in_phi(basis, l, 1)),
                    ],
                )?;
            }
        }
        Some(c)
    }
}

/// `y = exp(ε Σ g_k x_k)`.
#[derive(Clone, Debug)]
pub struct ExpLinear {
    pub epsilon: f64,
    pub gains: Vec<f64>,
}

impl ExpLinear {
    pub fn random(d: usize, epsilon: f64, seed: u64) -> Self {
        let mut g = rng::seeded(seed);
        ExpLinear {
            epsilon,
            gains: (0..d).map(|_| g.random_range(-1.0..1.0)).collect(),
        }
    }
}

impl Simulator for ExpLinear {
    fn name(&self) -> &str {
        "exp-linear"
    }

    fn dim(&self) -> usize {
        self.gains.len()
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        let s: f64 = self.gains.iter().zip(x).map(|(g, v)| g * v).sum();
        Ok((self.epsilon * s).exp())
    }

    /// Full tensor-grid projection; only available at small `d`.
    fn true_coefficients(&self, basis: &BasisSet) -> Option<Vec<f64>> {
        full_grid_projection(basis, |idx| {
            Ok(self.evaluate(&basis.grid_point(idx)).expect("infallible"))
        })
        .ok()
    }
}

/// Oracle defined by a known expansion; its coefficients are the truth.
#[derive(Clone, Debug)]
pub struct PlantedGpc {
    expansion: GpcExpansion,
}

impl PlantedGpc {
    pub fn new(expansion: GpcExpansion) -> Self {
        PlantedGpc { expansion }
    }

    pub fn expansion(&self) -> &GpcExpansion {
        &self.expansion
    }

    /// Sparse expansion whose full sample tensor has CP rank at most `terms`.
    ///
    /// It is a sum of `terms` separable products; each product involves one
    /// parameter with a factor of degree up to 2, or two parameters with
    /// affine factors, so every term stays inside total degree `p`.
    pub fn low_rank(basis: Arc<BasisSet>, terms: usize, seed: u64) -> Result<Self> {
        if basis.order() < 1 {
            return Err(Error::Config("planted oracle needs p >= 1".into()));
        }
        let d = basis.dim();
        let p = basis.order();
        let mut g = rng::seeded(seed);
        let mut coeffs = vec![0.0; basis.len()];
        for t in 0..terms {
            let amplitude = if t == 0 {
                1.0
            } else {
                signed(&mut g, 0.3, 1.0)
            };
            let factors: Vec<(usize, Vec<f64>)> = if d >= 2 && p >= 2 && g.random_bool(0.6) {
                let a = g.random_range(0..d);
                let mut b = g.random_range(0..d - 1);
                if b >= a {
                    b += 1;
                }
                vec![
                    (a, vec![g.random_range(0.5..1.5), signed(&mut g, 0.2, 0.8)]),
                    (b, vec![g.random_range(0.5..1.5), signed(&mut g, 0.2, 0.8)]),
                ]
            } else {
                let a = g.random_range(0..d);
                let mut f = vec![g.random_range(0.5..1.5), signed(&mut g, 0.2, 0.8)];
                if p >= 2 {
                    f.push(signed(&mut g, 0.1, 0.4));
                }
                vec![(a, f)]
            };
            add_product(&basis, &mut coeffs, amplitude, &factors)
                .expect("planted terms stay inside the basis");
        }
        Ok(PlantedGpc {
            expansion: GpcExpansion::new(basis, coeffs)?,
        })
    }
}

impl Simulator for PlantedGpc {
    fn name(&self) -> &str {
        "planted-gpc"
    }

    fn dim(&self) -> usize {
        self.expansion.basis().dim()
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        Ok(self.expansion.eval(x))
    }

    fn true_coefficients(&self, basis: &BasisSet) -> Option<Vec<f64>> {
        let own = self.expansion.basis();
        (basis.dim() == own.dim() && basis.order() == own.order())
            .then(|| self.expansion.coeffs().to_vec())
    }
}

/// Parameters of the built-in oracles. Unused fields are ignored.
#[derive(Clone, Debug)]
pub struct OracleParams {
    pub seed: u64,
    /// Planted CP rank (`planted-gpc`).
    pub terms: usize,
    /// Exponent scale (`exp-linear`).
    pub epsilon: f64,
    pub linear_terms: usize,
    pub quadratic_terms: usize,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            seed: 0,
            terms: 2,
            epsilon: 0.1,
            linear_terms: 4,
            quadratic_terms: 2,
        }
    }
}

pub const BUILTIN_ORACLES: [&str; 3] = ["sparse-quadratic", "exp-linear", "planted-gpc"];

/// Looks up a built-in synthetic simulator by name.
pub fn builtin_oracle(
    name: &str,
    basis: Arc<BasisSet>,
    params: &OracleParams,
) -> Result<Box<dyn Simulator>> {
    let d = basis.dim();
    Ok(match name {
        "sparse-quadratic" => Box::new(SparseQuadratic::random(
            d,
            params.linear_terms,
            params.quadratic_terms,
            params.seed,
        )),
        "exp-linear" => Box::new(ExpLinear::random(d, params.epsilon, params.seed)),
        "planted-gpc" => Box::new(PlantedGpc::low_rank(basis, params.terms, params.seed)?),
        other => {
            return Err(Error::Config(format!(
                "unknown oracle {other:?}; expected one of {BUILTIN_ORACLES:?}"
            )))
        }
    })
}
