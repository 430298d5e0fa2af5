//! Univariate orthonormal polynomials and Gauss quadrature rules for the
//! probability density of a single parameter.
//!
//! Monic orthogonal polynomials obey `π_{a+1}(x) = (x - γ_a) π_a(x) - κ_a π_{a-1}(x)`
//! with `π_{-1} = 0`, `π_0 = 1`, `κ_0 = 1`. The orthonormal family is
//! `φ_a = π_a / sqrt(κ_0 κ_1 ... κ_a)`, evaluated here by its own forward
//! recurrence. Gauss rules come from the eigen-decomposition of the Jacobi
//! matrix built from the same coefficients.

mod tridiag;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub use tridiag::{eigen_first_row, TridiagEigen};

/// Expectation functional of a user-supplied density.
///
/// `expectation(c)` must return `E[c[0] + c[1] x + c[2] x^2 + ...]` and be
/// exact for polynomials of degree up to `2 * order + 2` when a recurrence of
/// `order` is requested.
pub trait ExpectationOracle: Send + Sync + fmt::Debug {
    fn expectation(&self, coeffs: &[f64]) -> f64;

    /// Draws one value from the density, if the owner can provide draws.
    fn sample(&self, _rng: &mut dyn RngCore) -> Option<f64> {
        None
    }
}

/// Probability density of one parameter.
#[derive(Clone, Debug)]
pub enum DensitySpec {
    Gaussian { mean: f64, stddev: f64 },
    Uniform { lower: f64, upper: f64 },
    Custom(Arc<dyn ExpectationOracle>),
}

impl DensitySpec {
    pub fn gaussian(mean: f64, stddev: f64) -> Result<Self> {
        let d = DensitySpec::Gaussian { mean, stddev };
        d.validate()?;
        Ok(d)
    }

    pub fn standard_gaussian() -> Self {
        DensitySpec::Gaussian {
            mean: 0.0,
            stddev: 1.0,
        }
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        let d = DensitySpec::Uniform { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn custom(oracle: Arc<dyn ExpectationOracle>) -> Self {
        DensitySpec::Custom(oracle)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DensitySpec::Gaussian { mean, stddev } => {
                if !mean.is_finite() || !(stddev.is_finite() && stddev > 0.0) {
                    return Err(Error::InvalidDensity(format!(
                        "gaussian needs finite mean and stddev > 0, got ({mean}, {stddev})"
                    )));
                }
            }
            DensitySpec::Uniform { lower, upper } => {
                if !lower.is_finite() || !upper.is_finite() || upper <= lower {
                    return Err(Error::InvalidDensity(format!(
                        "uniform needs finite lower < upper, got ({lower}, {upper})"
                    )));
                }
            }
            DensitySpec::Custom(_) => {}
        }
        Ok(())
    }

    /// Center of symmetry for the built-in symmetric kinds.
    pub fn center_of_symmetry(&self) -> Option<f64> {
        match *self {
            DensitySpec::Gaussian { mean, .. } => Some(mean),
            DensitySpec::Uniform { lower, upper } => Some(0.5 * (lower + upper)),
            DensitySpec::Custom(_) => None,
        }
    }

    /// `E[x^m]` in closed form for the built-in kinds.
    pub fn moment(&self, m: usize) -> Option<f64> {
        // Expand (c + h t)^m around the center with the standardized moments of t.
        let (c, h, standardized): (f64, f64, fn(usize) -> f64) = match *self {
            DensitySpec::Gaussian { mean, stddev } => (mean, stddev, gaussian_std_moment),
            DensitySpec::Uniform { lower, upper } => (
                0.5 * (lower + upper),
                0.5 * (upper - lower),
                uniform_std_moment,
            ),
            DensitySpec::Custom(_) => return None,
        };
        let mut total = 0.0;
        let mut binom = 1.0;
        for j in 0..=m {
            if j > 0 {
                binom = binom * (m - j + 1) as f64 / j as f64;
            }
            let t = standardized(j);
            if t != 0.0 {
                total += binom * c.powi((m - j) as i32) * h.powi(j as i32) * t;
            }
        }
        Some(total)
    }

    /// Expectation of the polynomial with monomial coefficients `coeffs`.
    pub fn expectation(&self, coeffs: &[f64]) -> f64 {
        match self {
            DensitySpec::Custom(oracle) => oracle.expectation(coeffs),
            _ => coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(m, c)| c * self.moment(m).expect("built-in moment"))
                .sum(),
        }
    }

    /// Draws one value, or `None` for a custom density without a sampler.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match self {
            DensitySpec::Gaussian { mean, stddev } => {
                Some(Normal::new(*mean, *stddev).ok()?.sample(rng))
            }
            DensitySpec::Uniform { lower, upper } => Some(rng.random_range(*lower..*upper)),
            DensitySpec::Custom(oracle) => {
                let mut dynrng: &mut dyn RngCore = &mut RngAdapter(rng);
                oracle.sample(&mut dynrng)
            }
        }
    }
}

struct RngAdapter<'a, R: ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

fn gaussian_std_moment(j: usize) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    // (j - 1)!!
    (1..j).step_by(2).map(|k| k as f64).product()
}

fn uniform_std_moment(j: usize) -> f64 {
    if j % 2 == 1 {
        0.0
    } else {
        1.0 / (j + 1) as f64
    }
}

/// Three-term recurrence coefficients `γ_0..γ_{m-1}` and `κ_0..κ_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Recurrence1D {
    gamma: Vec<f64>,
    kappa: Vec<f64>,
}

impl Recurrence1D {
    /// Wraps raw coefficients after checking lengths and positivity of `κ_a`, `a >= 1`.
    pub fn new(gamma: Vec<f64>, kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() != gamma.len() + 1 {
            return Err(Error::Degenerate(format!(
                "need {} kappa values for {} gamma values, got {}",
                gamma.len() + 1,
                gamma.len(),
                kappa.len()
            )));
        }
        if gamma.iter().chain(&kappa).any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite coefficient".into()));
        }
        if let Some((a, k)) = kappa.iter().enumerate().skip(1).find(|(_, k)| **k <= 0.0) {
            return Err(Error::Degenerate(format!(
                "kappa_{a} = {k} is not positive"
            )));
        }
        Ok(Recurrence1D { gamma, kappa })
    }

    pub fn order(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    /// `φ_0(x) ..= φ_max_degree(x)` by the normalized forward recurrence.
    pub fn eval_all(&self, max_degree: usize, x: f64) -> Result<Vec<f64>> {
        if max_degree > self.order() {
            return Err(Error::DegreeOutOfRange {
                degree: max_degree,
                order: self.order(),
            });
        }
        let mut out = Vec::with_capacity(max_degree + 1);
        out.push(1.0);
        let mut prev = 0.0;
        let mut cur = 1.0;
        for a in 0..max_degree {
            let back = if a == 0 {
                0.0
            } else {
                self.kappa[a].sqrt() * prev
            };
            let next = ((x - self.gamma[a]) * cur - back) / self.kappa[a + 1].sqrt();
            prev = cur;
            cur = next;
            out.push(cur);
        }
        Ok(out)
    }
}

/// Recurrence coefficients for `density`, up to polynomial degree `order`.
///
/// Gaussian and uniform densities use their closed forms (probabilists'
/// Hermite and Legendre, shifted and scaled); custom densities go through
/// [`build_recurrence_numeric`].
pub fn build_recurrence(density: &DensitySpec, order: usize) -> Result<Recurrence1D> {
    if order == 0 {
        return Err(Error::Config("recurrence order must be at least 1".into()));
    }
    density.validate()?;
    match *density {
        DensitySpec::Gaussian { mean, stddev } => {
            let gamma = vec![mean; order];
            let kappa = (0..=order)
                .map(|a| {
                    if a == 0 {
                        1.0
                    } else {
                        a as f64 * stddev * stddev
                    }
                })
                .collect();
            Recurrence1D::new(gamma, kappa)
        }
        DensitySpec::Uniform { lower, upper } => {
            let c = 0.5 * (lower + upper);
            let h = 0.5 * (upper - lower);
            let gamma = vec![c; order];
            let kappa = (0..=order)
                .map(|a| {
                    if a == 0 {
                        1.0
                    } else {
                        let a2 = (a * a) as f64;
                        h * h * a2 / (4.0 * a2 - 1.0)
                    }
                })
                .collect();
            Recurrence1D::new(gamma, kappa)
        }
        DensitySpec::Custom(_) => build_recurrence_numeric(density, order),
    }
}

/// Recurrence coefficients from expectations of the monic polynomials:
/// `γ_a = E[x π_a²] / E[π_a²]` and `κ_{a+1} = E[π_{a+1}²] / E[π_a²]`.
///
/// Works for any density kind; the built-in kinds use it only as a cross-check.
pub fn build_recurrence_numeric(density: &DensitySpec, order: usize) -> Result<Recurrence1D> {
    if order == 0 {
        return Err(Error::Config("recurrence order must be at least 1".into()));
    }
    let expect = |poly: &[f64], degree: usize| -> Result<f64> {
        let v = density.expectation(poly);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteExpectation { degree })
        }
    };

    let mass = expect(&[1.0], 0)?;
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::Degenerate(format!(
            "density integrates to {mass}, expected 1"
        )));
    }

    let mut gamma = Vec::with_capacity(order);
    let mut kappa = vec![1.0];
    let mut prev: Vec<f64> = Vec::new();
    let mut cur: Vec<f64> = vec![1.0];
    let mut norm_cur = 1.0;
    for a in 0..order {
        let sq = poly_mul(&cur, &cur);
        let x_sq = shift_up(&sq);
        let g = expect(&x_sq, a)? / norm_cur;
        gamma.push(g);

        // π_{a+1} = (x - γ_a) π_a - κ_a π_{a-1}
        let mut next = shift_up(&cur);
        for (i, c) in cur.iter().enumerate() {
            next[i] -= g * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= kappa[a] * c;
        }
        let norm_next = expect(&poly_mul(&next, &next), a + 1)?;
        let k = norm_next / norm_cur;
        if !(k > 0.0) {
            return Err(Error::Degenerate(format!(
                "kappa_{} = {k} is not positive",
                a + 1
            )));
        }
        kappa.push(k);
        prev = cur;
        cur = next;
        norm_cur = norm_next;
    }
    Recurrence1D::new(gamma, kappa)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn shift_up(p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(0.0);
    out.extend_from_slice(p);
    out
}

/// `φ_degree(point)`.
pub fn orthonormal_eval(rec: &Recurrence1D, degree: usize, point: f64) -> Result<f64> {
    Ok(*rec.eval_all(degree, point)?.last().expect("nonempty"))
}

/// An `n`-point Gauss rule. Nodes ascend; weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule1D {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_i f(x_i) w_i`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(*x) * w)
            .sum()
    }
}

/// Golub-Welsch: nodes are the eigenvalues of the `n×n` Jacobi matrix
/// (diagonal `γ_{i-1}`, off-diagonal `sqrt(κ_i)`), weights the squared first
/// components of its unit eigenvectors.
pub fn gauss_rule(rec: &Recurrence1D, n: usize) -> Result<QuadRule1D> {
    if n == 0 {
        return Err(Error::Config("a Gauss rule needs at least one node".into()));
    }
    if n > rec.order() {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            order: rec.order(),
        });
    }
    let diag = &rec.gamma[..n];
    let off: Vec<f64> = rec.kappa[1..n].iter().map(|k| k.sqrt()).collect();
    let eig = eigen_first_row(diag, &off)?;

    let mut pairs: Vec<(f64, f64)> = eig
        .values
        .into_iter()
        .zip(eig.first_components.iter().map(|q| q * q))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

    if n > 1 {
        let span = nodes[n - 1] - nodes[0];
        let tol = 1e-12 * span;
        if !(span > 0.0) || nodes.windows(2).any(|w| w[1] - w[0] <= tol) {
            return Err(Error::Degenerate(format!("Gauss nodes collide: {nodes:?}")));
        }
    }
    Ok(QuadRule1D { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Standard-normal moments supplied the way a custom density owner would.
    #[derive(Debug)]
    struct NormalMoments;

    impl ExpectationOracle for NormalMoments {
        fn expectation(&self, coeffs: &[f64]) -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(m, c)| {
                    if m % 2 == 1 {
                        0.0
                    } else {
                        c * (1..m).step_by(2).map(|k| k as f64).product::<f64>()
                    }
                })
                .sum()
        }
    }

    #[test]
    fn hermite_recurrence_order_three() {
        let rec = build_recurrence(&DensitySpec::standard_gaussian(), 3).unwrap();
        assert_eq!(rec.gamma(), &[0.0, 0.0, 0.0]);
        assert_eq!(rec.kappa(), &[1.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn uniform_symmetric_gamma_is_zero() {
        let rec = build_recurrence(&DensitySpec::uniform(-1.0, 1.0).unwrap(), 1).unwrap();
        assert_eq!(rec.gamma()[0], 0.0);
    }

    #[test]
    fn custom_oracle_reproduces_hermite() {
        let custom = DensitySpec::custom(Arc::new(NormalMoments));
        let numeric = build_recurrence(&custom, 3).unwrap();
        let closed = build_recurrence(&DensitySpec::standard_gaussian(), 3).unwrap();
        for (a, b) in numeric.gamma().iter().zip(closed.gamma()) {
            assert!(close(*a, *b, 1e-10));
        }
        for (a, b) in numeric.kappa().iter().zip(closed.kappa()) {
            assert!(close(*a, *b, 1e-10));
        }
    }

    #[test]
    fn numeric_path_matches_closed_forms() {
        for density in [
            DensitySpec::gaussian(1.5, 0.7).unwrap(),
            DensitySpec::uniform(-2.0, 5.0).unwrap(),
        ] {
            let a = build_recurrence(&density, 6).unwrap();
            let b = build_recurrence_numeric(&density, 6).unwrap();
            for (x, y) in a.gamma().iter().zip(b.gamma()) {
                assert!(close(*x, *y, 1e-9 * (1.0 + x.abs())), "{x} vs {y}");
            }
            for (x, y) in a.kappa().iter().zip(b.kappa()) {
                assert!(close(*x, *y, 1e-9 * (1.0 + x.abs())), "{x} vs {y}");
            }
        }
    }

    #[derive(Debug)]
    struct Broken;
    impl ExpectationOracle for Broken {
        fn expectation(&self, coeffs: &[f64]) -> f64 {
            if coeffs.len() > 2 {
                f64::NAN
            } else {
                coeffs[0]
            }
        }
    }

    #[test]
    fn non_finite_oracle_is_rejected() {
        let err = build_recurrence(&DensitySpec::custom(Arc::new(Broken)), 2).unwrap_err();
        assert!(matches!(err, Error::NonFiniteExpectation { .. }));
    }

    /// Point mass at zero: every π_a with a >= 1 has zero norm.
    #[derive(Debug)]
    struct Dirac;
    impl ExpectationOracle for Dirac {
        fn expectation(&self, coeffs: &[f64]) -> f64 {
            coeffs[0]
        }
    }

    #[test]
    fn degenerate_density_is_rejected() {
        let err = build_recurrence(&DensitySpec::custom(Arc::new(Dirac)), 2).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn invalid_densities() {
        assert!(DensitySpec::gaussian(0.0, 0.0).is_err());
        assert!(DensitySpec::gaussian(0.0, -1.0).is_err());
        assert!(DensitySpec::uniform(1.0, 1.0).is_err());
        assert!(Recurrence1D::new(vec![0.0], vec![1.0, -1.0]).is_err());
        assert!(Recurrence1D::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn orthonormal_values() {
        let rec = build_recurrence(&DensitySpec::standard_gaussian(), 3).unwrap();
        assert_eq!(orthonormal_eval(&rec, 0, 17.3).unwrap(), 1.0);
        assert!(close(orthonormal_eval(&rec, 2, 1.0).unwrap(), 0.0, 1e-15));
        // φ_2(x) = (x² - 1)/√2
        let x: f64 = 2.5;
        assert!(close(
            orthonormal_eval(&rec, 2, x).unwrap(),
            (x * x - 1.0) / 2f64.sqrt(),
            1e-14
        ));
        let leg = build_recurrence(&DensitySpec::uniform(-1.0, 1.0).unwrap(), 2).unwrap();
        assert!(close(
            orthonormal_eval(&leg, 1, 0.5).unwrap(),
            0.5 * 3f64.sqrt(),
            1e-15
        ));
        assert!(matches!(
            orthonormal_eval(&rec, 4, 0.0),
            Err(Error::DegreeOutOfRange {
                degree: 4,
                order: 3
            })
        ));
    }

    #[test]
    fn gauss_rules_small_cases() {
        let rec = build_recurrence(&DensitySpec::standard_gaussian(), 4).unwrap();
        let one = gauss_rule(&rec, 1).unwrap();
        assert_eq!(one.nodes(), &[0.0]);
        assert_eq!(one.weights(), &[1.0]);

        let three = gauss_rule(&rec, 3).unwrap();
        let s3 = 3f64.sqrt();
        for (x, e) in three.nodes().iter().zip([-s3, 0.0, s3]) {
            assert!(close(*x, e, 1e-14), "{x} vs {e}");
        }
        for (w, e) in three
            .weights()
            .iter()
            .zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
        {
            assert!(close(*w, e, 1e-14));
        }
        let moments = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0];
        for (m, e) in moments.iter().enumerate() {
            assert!(close(three.integrate(|x| x.powi(m as i32)), *e, 1e-13));
        }

        let leg = build_recurrence(&DensitySpec::uniform(-1.0, 1.0).unwrap(), 2).unwrap();
        let two = gauss_rule(&leg, 2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!(close(two.nodes()[0], -r, 1e-15) && close(two.nodes()[1], r, 1e-15));
        assert!(close(two.weights()[0], 0.5, 1e-15) && close(two.weights()[1], 0.5, 1e-15));
        assert!(close(
            two.integrate(|x| x.powi(3) + x * x),
            1.0 / 3.0,
            1e-15
        ));

        assert!(gauss_rule(&rec, 5).is_err());
        assert!(gauss_rule(&rec, 0).is_err());
    }

    #[test]
    fn moments_of_shifted_densities() {
        let g = DensitySpec::gaussian(2.0, 3.0).unwrap();
        assert!(close(g.moment(1).unwrap(), 2.0, 1e-14));
        assert!(close(g.moment(2).unwrap(), 13.0, 1e-12));
        let u = DensitySpec::uniform(1.0, 3.0).unwrap();
        assert!(close(u.moment(2).unwrap(), (27.0 - 1.0) / 6.0, 1e-14));
    }
}
