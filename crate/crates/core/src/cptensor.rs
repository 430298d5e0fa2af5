//! Canonical polyadic (CP) tensors: `X = Σ_j u_1^j ∘ ... ∘ u_d^j`.
//!
//! Each factor `U^(k)` is `n×r` and stored column-major, so factor `k` is
//! exactly `vec(U^(k))`: entry `(i, j)` sits at `j * n + i`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::sampling::SampleData;

/// Grid index with 0-based components. Displayed 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TensorIndex(pub Vec<usize>);

impl TensorIndex {
    /// From 1-based components, as found in files.
    pub fn from_one_based(components: &[usize], n: usize) -> Result<Self> {
        if let Some(c) = components.iter().find(|c| **c == 0 || **c > n) {
            return Err(Error::IndexOutOfBounds(format!(
                "component {c} outside 1..={n}"
            )));
        }
        Ok(TensorIndex(components.iter().map(|c| c - 1).collect()))
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|c| c + 1).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn in_bounds(&self, d: usize, n: usize) -> bool {
        self.0.len() == d && self.0.iter().all(|c| *c < n)
    }
}

impl fmt::Display for TensorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c + 1)?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpFactors {
    n: usize,
    r: usize,
    factors: Vec<Vec<f64>>,
}

impl CpFactors {
    pub fn new(n: usize, r: usize, factors: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || r == 0 || factors.is_empty() {
            return Err(Error::Config("CP factors need n, r, d >= 1".into()));
        }
        if let Some(k) = factors.iter().position(|u| u.len() != n * r) {
            return Err(Error::Config(format!(
                "factor {} has {} entries, expected {}",
                k + 1,
                factors[k].len(),
                n * r
            )));
        }
        if factors.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite factor entry".into()));
        }
        Ok(CpFactors { n, r, factors })
    }

    pub fn zeros(d: usize, n: usize, r: usize) -> Self {
        CpFactors {
            n,
            r,
            factors: vec![vec![0.0; n * r]; d],
        }
    }

    /// Entries i.i.d. uniform on `[-scale, scale]`.
    pub fn random_uniform(d: usize, n: usize, r: usize, scale: f64, seed: u64) -> Self {
        let mut g = rng::seeded(seed);
        let factors = (0..d)
            .map(|_| (0..n * r).map(|_| g.random_range(-scale..=scale)).collect())
            .collect();
        CpFactors { n, r, factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    /// `vec(U^(k))`.
    pub fn factor(&self, k: usize) -> &[f64] {
        &self.factors[k]
    }

    pub fn set_factor(&mut self, k: usize, values: Vec<f64>) {
        assert_eq!(values.len(), self.n * self.r, "factor length");
        self.factors[k] = values;
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    /// `U^(k)(i, j)`.
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.factors[k][j * self.n + i]
    }

    /// `Σ_j Π_k U^(k)(i_k, j)`.
    pub fn entry(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.dim());
        (0..self.r)
            .map(|j| {
                idx.iter()
                    .enumerate()
                    .map(|(k, i)| self.factors[k][j * self.n + i])
                    .product::<f64>()
            })
            .sum()
    }

    /// `⟨X, v_1 ∘ ... ∘ v_d⟩ = Σ_j Π_k ⟨u_k^j, v_k⟩` without forming `X`.
    pub fn inner_rank1(&self, v: &[impl AsRef<[f64]>]) -> f64 {
        assert_eq!(v.len(), self.dim(), "one vector per mode");
        (0..self.r)
            .map(|j| {
                v.iter()
                    .enumerate()
                    .map(|(k, vk)| {
                        let vk = vk.as_ref();
                        assert_eq!(vk.len(), self.n, "vector length");
                        let col = &self.factors[k][j * self.n..(j + 1) * self.n];
                        col.iter().zip(vk).map(|(a, b)| a * b).sum::<f64>()
                    })
                    .product::<f64>()
            })
            .sum()
    }

    /// `½ Σ_{i∈Ω} (x_i - y_i)²`.
    pub fn project_residual(&self, samples: &SampleData) -> f64 {
        0.5 * samples
            .iter()
            .map(|(idx, y)| {
                let e = self.entry(&idx.0) - y;
                e * e
            })
            .sum::<f64>()
    }

    /// `Σ_k ‖U^(k)‖_F²`.
    pub fn squared_norm(&self) -> f64 {
        self.factors.iter().flatten().map(|v| v * v).sum()
    }

    /// Dense tensor with every entry; refused above [`DenseTensor::MAX_ENTRIES`].
    pub fn materialize(&self) -> Result<DenseTensor> {
        let dims = vec![self.n; self.dim()];
        let mut t = DenseTensor::zeros(dims)?;
        let mut idx = vec![0; self.dim()];
        for v in t.values.iter_mut() {
            *v = self.entry(&idx);
            increment(&mut idx, self.n);
        }
        Ok(t)
    }
}

/// Row-major increment with the last component fastest.
fn increment(idx: &mut [usize], n: usize) {
    for c in idx.iter_mut().rev() {
        *c += 1;
        if *c < n {
            return;
        }
        *c = 0;
    }
}

/// Small dense tensor, row-major with the last index fastest. Test-scale only.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    pub const MAX_ENTRIES: usize = 10_000_000;

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let total = dims
            .iter()
            .try_fold(1usize, |acc, n| acc.checked_mul(*n))
            .filter(|t| *t <= Self::MAX_ENTRIES)
            .ok_or_else(|| Error::ScaleGuard {
                entries: dims
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join("x"),
                limit: Self::MAX_ENTRIES,
            })?;
        Ok(DenseTensor {
            dims,
            values: vec![0.0; total],
        })
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let mut idx = vec![0; t.dims.len()];
        for k in 0..t.values.len() {
            t.values[k] = f(&idx);
            t.step(&mut idx);
        }
        Ok(t)
    }

    /// Outer product `v_1 ∘ ... ∘ v_d`.
    pub fn outer(vectors: &[Vec<f64>]) -> Result<Self> {
        let dims = vectors.iter().map(Vec::len).collect();
        Self::from_fn(dims, |idx| {
            idx.iter().zip(vectors).map(|(i, v)| v[*i]).product()
        })
    }

    fn step(&self, idx: &mut [usize]) {
        for (c, n) in idx.iter_mut().zip(&self.dims).rev() {
            *c += 1;
            if *c < *n {
                return;
            }
            *c = 0;
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.offset(idx)]
    }

    pub fn inner(&self, other: &DenseTensor) -> f64 {
        assert_eq!(self.dims, other.dims, "tensor shapes");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn sub(&self, other: &DenseTensor) -> DenseTensor {
        assert_eq!(self.dims, other.dims, "tensor shapes");
        DenseTensor {
            dims: self.dims.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `P_Ω`: keeps the listed entries and zeroes the rest.
    pub fn masked<'a>(&self, keep: impl IntoIterator<Item = &'a TensorIndex>) -> DenseTensor {
        let mut out = DenseTensor {
            dims: self.dims.clone(),
            values: vec![0.0; self.values.len()],
        };
        for idx in keep {
            let o = self.offset(&idx.0);
            out.values[o] = self.values[o];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_rank_one() {
        let x = CpFactors::new(3, 1, vec![vec![1.0; 3]; 4]).unwrap();
        assert_eq!(x.entry(&[0, 2, 1, 1]), 1.0);
        let ones = vec![vec![1.0; 3]; 4];
        assert_eq!(x.inner_rank1(&ones), 81.0);
        let mut with_zero = ones.clone();
        with_zero[2] = vec![0.0; 3];
        assert_eq!(x.inner_rank1(&with_zero), 0.0);
    }

    #[test]
    fn hand_outer_product() {
        let x = CpFactors::new(2, 1, vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let t = x.materialize().unwrap();
        assert_eq!(t.values(), &[3.0, 4.0, 6.0, 8.0]);
        let norm = (9.0f64 + 16.0 + 36.0 + 64.0).sqrt();
        assert!((t.frobenius_norm() - norm).abs() < 1e-15);
    }

    #[test]
    fn matrix_case_is_low_rank_product() {
        let x = CpFactors::random_uniform(2, 4, 3, 1.0, 11);
        for i in 0..4 {
            for l in 0..4 {
                let prod: f64 = (0..3).map(|j| x.get(0, i, j) * x.get(1, l, j)).sum();
                assert!((x.entry(&[i, l]) - prod).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn materialization_guard() {
        let x = CpFactors::zeros(15, 3, 1);
        assert!(matches!(x.materialize(), Err(Error::ScaleGuard { .. })));
    }

    #[test]
    fn mask_is_idempotent() {
        let x = CpFactors::random_uniform(3, 3, 2, 1.0, 5)
            .materialize()
            .unwrap();
        let keep = vec![TensorIndex(vec![0, 1, 2]), TensorIndex(vec![2, 2, 0])];
        let once = x.masked(&keep);
        assert_eq!(once.masked(&keep), once);
        assert_eq!(once.get(&[0, 1, 2]), x.get(&[0, 1, 2]));
        assert_eq!(once.get(&[0, 0, 0]), 0.0);
    }

    #[test]
    fn index_display_is_one_based() {
        let idx = TensorIndex::from_one_based(&[1, 3, 2], 3).unwrap();
        assert_eq!(idx.0, vec![0, 2, 1]);
        assert_eq!(idx.to_string(), "(1,3,2)");
        assert!(TensorIndex::from_one_based(&[0, 1], 3).is_err());
        assert!(TensorIndex::from_one_based(&[4, 1], 3).is_err());
    }
}
