//! Polynomial-chaos surrogates of high-dimensional black-box functions,
//! recovered from a small random subset of tensor-product quadrature samples.
//!
//! The unknown full sample tensor is modelled as a low-rank canonical
//! polyadic (CP) tensor whose implied polynomial-chaos coefficients are
//! sparse. It is fitted by alternating minimization over the CP factors,
//! with each convex mode subproblem solved as a generalized LASSO by ADMM.
//!
//! Module map:
//! - [`orthopoly`]: orthonormal polynomial recurrences and Gauss rules.
//! - [`gpc`]: multivariate basis, weight-tensor factors, expansions, statistics.
//! - [`cptensor`]: CP tensors, rank-1 inner products, dense test oracle.
//! - [`sampling`]: sample plans, simulator oracles, evaluation.
//! - [`recovery`]: objective, subproblem assembly, ADMM, alternating minimization.
//! - [`io`]: delimited-text artifact formats.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cptensor;
pub mod error;
pub mod gpc;
pub mod io;
pub mod orthopoly;
pub mod recovery;
pub mod rng;
pub mod sampling;

pub use cptensor::{CpFactors, DenseTensor, TensorIndex};
pub use error::{Error, Result};
pub use gpc::{BasisSet, GpcExpansion, Histogram, MultiIndex};
pub use orthopoly::{DensitySpec, QuadRule1D, Recurrence1D};
pub use recovery::{
    ConvergenceRecord, RecoveryConfig, RecoveryResult, SubproblemMatrices, Termination, ZUpdate,
};
pub use sampling::{SampleData, SamplePlan, Simulator};
