//! Run configuration, read from a TOML file.
//!
//! ```toml
//! seed = 7
//! output_dir = "runs/planted"
//!
//! [problem]
//! d = 20
//! n = 3
//! p = 2
//! density = { kind = "gaussian", mean = 0.0, stddev = 1.0 }
//!
//! [oracle]
//! name = "planted-gpc"
//! terms = 2
//!
//! [sampling]
//! omega_size = 300
//! validation_size = 50
//!
//! [recovery]
//! rank = 3
//! lambda = 0.01
//!
//! [model_selection]
//! r_grid = [3]
//! lambda_grid = [0.001, 0.01, 0.1]
//! eps_pr_target = 0.01
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tenrec::recovery::ZUpdate;
use tenrec::rng::sub_seed;
use tenrec::sampling::{builtin_oracle, OracleParams};
use tenrec::{BasisSet, DensitySpec, RecoveryConfig, Simulator};

use crate::error::CliError;

/// Oracle name meaning "values come from a sample file".
pub const EXTERNAL: &str = "external";

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub recovery: RecoverySection,
    pub model_selection: Option<SelectionConfig>,
    #[serde(default)]
    pub density: DensityOutput,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("tenrec-out")
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    pub n: usize,
    pub p: usize,
    /// One density broadcast to every parameter.
    pub density: Option<DensityEntry>,
    /// One density per parameter; overrides `density`.
    pub densities: Option<Vec<DensityEntry>>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityEntry {
    Gaussian {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        stddev: f64,
    },
    Uniform {
        lower: f64,
        upper: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl DensityEntry {
    fn to_spec(self) -> tenrec::Result<DensitySpec> {
        match self {
            DensityEntry::Gaussian { mean, stddev } => DensitySpec::gaussian(mean, stddev),
            DensityEntry::Uniform { lower, upper } => DensitySpec::uniform(lower, upper),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "external")]
    pub name: String,
    /// Defaults to a sub-seed of the run seed.
    pub seed: Option<u64>,
    pub terms: Option<usize>,
    pub epsilon: Option<f64>,
    pub linear_terms: Option<usize>,
    pub quadratic_terms: Option<usize>,
}

fn external() -> String {
    EXTERNAL.to_string()
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            name: external(),
            seed: None,
            terms: None,
            epsilon: None,
            linear_terms: None,
            quadratic_terms: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub omega_size: usize,
    /// Defaults to `max(25, omega_size / 10)`.
    pub validation_size: Option<usize>,
}

/// Recovery settings; unset fields take the solver defaults.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RecoverySection {
    pub rank: Option<usize>,
    pub lambda: Option<f64>,
    pub admm_penalty: Option<f64>,
    pub admm_penalty_relative: Option<bool>,
    pub admm_tol_primal: Option<f64>,
    pub admm_tol_dual: Option<f64>,
    pub admm_max_iter: Option<usize>,
    pub outer_tol_tensor: Option<f64>,
    pub outer_tol_gpc: Option<f64>,
    pub outer_tol_cost: Option<f64>,
    pub outer_max_iter: Option<usize>,
    pub init_seed: Option<u64>,
    pub init_scale: Option<f64>,
    /// Negative disables the near-constant start (symmetric draw instead).
    pub init_spread: Option<f64>,
    pub prox_weight: Option<f64>,
    /// `"textbook"` or `"as-printed"`.
    pub z_update: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    pub r_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub eps_pr_target: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityOutput {
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_draws() -> usize {
    100_000
}

fn default_bins() -> usize {
    50
}

impl Default for DensityOutput {
    fn default() -> Self {
        DensityOutput {
            draws: default_draws(),
            bins: default_bins(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.detail())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let pr = &self.problem;
        if pr.d == 0 || pr.p == 0 {
            return bad("problem.d and problem.p must be >= 1".into());
        }
        if pr.n < pr.p + 1 {
            return bad(format!(
                "problem.n = {} must be at least p + 1 = {}",
                pr.n,
                pr.p + 1
            ));
        }
        if let Some(list) = &pr.densities {
            if list.len() != pr.d {
                return bad(format!("{} densities given for d = {}", list.len(), pr.d));
            }
        }
        if self.sampling.omega_size == 0 {
            return bad("sampling.omega_size must be >= 1".into());
        }
        if let Some(sel) = &self.model_selection {
            if sel.r_grid.is_empty() || sel.lambda_grid.is_empty() {
                return bad(
                    "model_selection.r_grid and model_selection.lambda_grid must be nonempty"
                        .into(),
                );
            }
            if sel.r_grid.contains(&0) || sel.lambda_grid.iter().any(|l| !(*l >= 0.0)) {
                return bad("model_selection grids need ranks >= 1 and lambdas >= 0".into());
            }
            if !(sel.eps_pr_target > 0.0) {
                return bad("model_selection.eps_pr_target must be > 0".into());
            }
        }
        if self.density.draws == 0 || self.density.bins == 0 {
            return bad("density.draws and density.bins must be >= 1".into());
        }
        if let Some(z) = &self.recovery.z_update {
            parse_z_update(z)?;
        }
        Ok(())
    }

    pub fn validation_size(&self) -> usize {
        self.sampling
            .validation_size
            .unwrap_or_else(|| (self.sampling.omega_size / 10).max(25))
    }

    pub fn densities(&self) -> Result<Vec<DensitySpec>, CliError> {
        let pr = &self.problem;
        let entries = match (&pr.densities, pr.density) {
            (Some(list), _) => list.clone(),
            (None, Some(one)) => vec![one; pr.d],
            (None, None) => vec![
                DensityEntry::Gaussian {
                    mean: 0.0,
                    stddev: 1.0
                };
                pr.d
            ],
        };
        Ok(entries
            .into_iter()
            .map(DensityEntry::to_spec)
            .collect::<tenrec::Result<_>>()?)
    }

    pub fn basis(&self) -> Result<Arc<BasisSet>, CliError> {
        let pr = &self.problem;
        Ok(Arc::new(BasisSet::new(
            pr.d,
            pr.p,
            self.densities()?,
            pr.n,
        )?))
    }

    pub fn is_external(&self) -> bool {
        self.oracle.name == EXTERNAL
    }

    /// The configured built-in oracle, or `None` in external mode.
    pub fn oracle(&self, basis: &Arc<BasisSet>) -> Result<Option<Box<dyn Simulator>>, CliError> {
        if self.is_external() {
            return Ok(None);
        }
        let o = &self.oracle;
        let defaults = OracleParams::default();
        let params = OracleParams {
            seed: o.seed.unwrap_or_else(|| sub_seed(self.seed, "oracle")),
            terms: o.terms.unwrap_or(defaults.terms),
            epsilon: o.epsilon.unwrap_or(defaults.epsilon),
            linear_terms: o.linear_terms.unwrap_or(defaults.linear_terms),
            quadratic_terms: o.quadratic_terms.unwrap_or(defaults.quadratic_terms),
        };
        Ok(Some(builtin_oracle(&o.name, basis.clone(), &params)?))
    }

    /// Solver settings for one `(rank, λ)` cell.
    pub fn recovery_config(&self, rank: usize, lambda: f64, basis_len: usize) -> RecoveryConfig {
        let s = &self.recovery;
        let mut c = RecoveryConfig::new(rank, lambda, basis_len);
        if let Some(v) = s.admm_penalty {
            c.admm_penalty = v;
        }
        if let Some(v) = s.admm_penalty_relative {
            c.admm_penalty_relative = v;
        }
        if let Some(v) = s.admm_tol_primal {
            c.admm_tol_primal = v;
        }
        if let Some(v) = s.admm_tol_dual {
            c.admm_tol_dual = v;
        }
        if let Some(v) = s.admm_max_iter {
            c.admm_max_iter = v;
        }
        if let Some(v) = s.outer_tol_tensor {
            c.outer_tol_tensor = v;
        }
        if let Some(v) = s.outer_tol_gpc {
            c.outer_tol_gpc = v;
        }
        if let Some(v) = s.outer_tol_cost {
            c.outer_tol_cost = v;
        }
        if let Some(v) = s.outer_max_iter {
            c.outer_max_iter = v;
        }
        c.init_seed = s.init_seed.unwrap_or_else(|| sub_seed(self.seed, "init"));
        c.init_scale = s.init_scale;
        if let Some(v) = s.init_spread {
            c.init_spread = (v >= 0.0).then_some(v);
        }
        if let Some(v) = s.prox_weight {
            c.prox_weight = v;
        }
        if let Some(z) = &s.z_update {
            c.z_update = parse_z_update(z).expect("validated");
        }
        c
    }

    /// `(rank, λ)` of a plain `recover` run.
    pub fn single_cell(&self) -> (usize, f64) {
        (
            self.recovery.rank.unwrap_or(1),
            self.recovery.lambda.unwrap_or(1e-2),
        )
    }
}

fn parse_z_update(s: &str) -> Result<ZUpdate, CliError> {
    match s {
        "textbook" => Ok(ZUpdate::Textbook),
        "as-printed" => Ok(ZUpdate::AsPrinted),
        other => Err(CliError::Config(format!(
            "recovery.z_update must be \"textbook\" or \"as-printed\", got {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        seed = 3
        [problem]
        d = 4
        n = 3
        p = 2
        [sampling]
        omega_size = 40
    "#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert!(c.is_external());
        assert_eq!(c.validation_size(), 25);
        assert_eq!(c.single_cell(), (1, 1e-2));
        let ds = c.densities().unwrap();
        assert_eq!(ds.len(), 4);
        assert!(ds.iter().all(|d| matches!(d, DensitySpec::Gaussian { mean, stddev } if *mean == 0.0 && *stddev == 1.0)));
        assert_eq!(c.density, DensityOutput::default());
    }

    #[test]
    fn rejects_bad_settings() {
        let few_nodes = MINIMAL.replace("n = 3", "n = 2");
        assert!(RunConfig::from_toml(&few_nodes).is_err());
        let typo = MINIMAL.replace("omega_size", "omega");
        assert!(RunConfig::from_toml(&typo).is_err());
        let empty_grid = format!(
            "{MINIMAL}\n[model_selection]\nr_grid = []\nlambda_grid = [0.1]\neps_pr_target = 0.1\n"
        );
        assert!(RunConfig::from_toml(&empty_grid).is_err());
    }

    #[test]
    fn per_parameter_densities() {
        let text = MINIMAL.replace(
            "p = 2",
            "p = 2\ndensities = [{kind = \"uniform\", lower = -1.0, upper = 1.0}, {kind = \"gaussian\"}, {kind = \"gaussian\", stddev = 2.0}, {kind = \"uniform\", lower = 0.0, upper = 3.0}]",
        );
        let c = RunConfig::from_toml(&text).unwrap();
        let ds = c.densities().unwrap();
        assert!(
            matches!(ds[0], DensitySpec::Uniform { lower, upper } if lower == -1.0 && upper == 1.0)
        );
        assert!(
            matches!(ds[2], DensitySpec::Gaussian { mean, stddev } if mean == 0.0 && stddev == 2.0)
        );
    }
}
