use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Unexpected failure not covered below.
    pub const OTHER: i32 = 1;
    /// Bad command-line usage (clap's own status).
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    /// Unreadable, unwritable or malformed files.
    pub const IO: i32 = 4;
    pub const INFEASIBLE_PLAN: i32 = 5;
    /// Singular subproblem, divergence or other numerical failure.
    pub const NUMERICAL: i32 = 6;
    pub const ORACLE: i32 = 7;
    /// Recovery stopped at the sweep cap; artifacts are still written.
    pub const MAX_ITERATIONS: i32 = 8;
    /// No model-selection cell met the target.
    pub const TARGET_NOT_MET: i32 = 9;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Core {
        path: PathBuf,
        source: tenrec::Error,
    },

    #[error(
        "no cell met eps_pr <= {target}; best was r = {rank}, lambda = {lambda}, eps_pr = {eps_pr}"
    )]
    TargetNotMet {
        target: f64,
        rank: usize,
        lambda: f64,
        eps_pr: f64,
    },

    #[error(transparent)]
    Tenrec(#[from] tenrec::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::File { .. } => exit::IO,
            CliError::Core { source, .. } | CliError::Tenrec(source) => core_code(source),
            CliError::TargetNotMet { .. } => exit::TARGET_NOT_MET,
        }
    }

    /// The message without the leading category.
    pub fn detail(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }

    pub fn at(path: impl Into<PathBuf>) -> impl FnOnce(tenrec::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Core { path, source }
    }
}

fn core_code(e: &tenrec::Error) -> i32 {
    use tenrec::Error as E;
    match e {
        E::Config(_)
        | E::InvalidDensity(_)
        | E::DegreeOutOfRange { .. }
        | E::Overflow(_)
        | E::ScaleGuard { .. }
        | E::IndexOutOfBounds(_) => exit::CONFIG,
        E::Io(_) | E::Csv(_) | E::Format(_) => exit::IO,
        E::InfeasiblePlan { .. } => exit::INFEASIBLE_PLAN,
        E::NonFiniteExpectation { .. }
        | E::Degenerate(_)
        | E::EigenNoConvergence { .. }
        | E::Singular { .. }
        | E::Divergence { .. }
        | E::UndefinedPredictionError => exit::NUMERICAL,
        E::Oracle { .. } => exit::ORACLE,
    }
}
