use thiserror::Error;

/// Errors produced anywhere in the recovery pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("expectation oracle returned a non-finite value while building degree {degree}")]
    NonFiniteExpectation { degree: usize },

    #[error("degenerate recurrence: {0}")]
    Degenerate(String),

    #[error("degree {degree} exceeds recurrence order {order}")]
    DegreeOutOfRange { degree: usize, order: usize },

    #[error(
        "tridiagonal eigensolver did not converge for eigenvalue {index} after {iterations} sweeps"
    )]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("count overflow: {0}")]
    Overflow(String),

    #[error("refusing to materialize {entries} entries (limit {limit})")]
    ScaleGuard { entries: String, limit: usize },

    #[error("index out of bounds: {0}")]
    IndexOutOfBounds(String),

    #[error("subproblem system is singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("non-finite cost at outer iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("prediction error undefined: validation values are all zero")]
    UndefinedPredictionError,

    #[error("infeasible plan: {requested} indices requested but only {available} exist")]
    InfeasiblePlan { requested: usize, available: String },

    #[error("oracle failed at index {index}: {message}")]
    Oracle { index: String, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
