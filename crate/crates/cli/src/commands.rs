//! Subcommand implementations. Each returns a structured report; printing
//! and exit statuses are handled by the caller.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use tenrec::gpc::sample_outputs;
use tenrec::io;
use tenrec::recovery::{recover, RecoveryResult};
use tenrec::rng::sub_seed;
use tenrec::sampling::{draw_plan, evaluate_plan, PlanSamples};
use tenrec::{
    BasisSet, Error, Histogram, SampleData, SamplePlan, Simulator, TensorIndex, Termination,
};

use crate::config::RunConfig;
use crate::error::CliError;

pub const COEFFICIENTS: &str = "coefficients.csv";
pub const HISTORY: &str = "history.csv";
pub const SUMMARY: &str = "summary.toml";
pub const DENSITY: &str = "density.csv";
pub const ORACLE_DENSITY: &str = "oracle_density.csv";
pub const SELECTION: &str = "selection.csv";
pub const PLAN: &str = "plan.csv";
pub const PLAN_VALIDATION: &str = "plan_validation.csv";
pub const SAMPLES: &str = "samples.csv";

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// A loaded config with overrides applied.
pub struct Run {
    pub cfg: RunConfig,
    pub basis: Arc<BasisSet>,
    pub out: PathBuf,
}

impl Run {
    pub fn load(config: &Path, ov: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::load(config)?;
        if let Some(seed) = ov.seed {
            cfg.seed = seed;
        }
        let out = ov.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
        let basis = cfg.basis()?;
        Ok(Run { cfg, basis, out })
    }

    pub fn plan(&self) -> Result<SamplePlan, CliError> {
        let pr = &self.cfg.problem;
        Ok(draw_plan(
            pr.d,
            pr.n,
            self.cfg.sampling.omega_size,
            self.cfg.validation_size(),
            sub_seed(self.cfg.seed, "plan"),
        )?)
    }

    /// Plan values from a sample file, or from the configured oracle.
    pub fn samples(
        &self,
        plan: &SamplePlan,
        file: Option<&Path>,
    ) -> Result<(PlanSamples, Option<Box<dyn Simulator>>), CliError> {
        let oracle = self.cfg.oracle(&self.basis)?;
        let samples = match (file, &oracle) {
            (Some(path), _) => {
                let pr = &self.cfg.problem;
                let data = io::read_samples(open(path)?, pr.d, pr.n).map_err(CliError::at(path))?;
                match_plan(plan, &data).map_err(CliError::at(path))?
            }
            (None, Some(o)) => evaluate_plan(plan, o.as_ref(), &self.basis)?,
            (None, None) => {
                return Err(CliError::Config(
                    "external oracle needs --samples (see plan-export)".into(),
                ))
            }
        };
        Ok((samples, oracle))
    }
}

/// Picks the values of `plan` out of an imported sample file. Indices
/// outside the plan are ignored.
pub fn match_plan(plan: &SamplePlan, data: &SampleData) -> tenrec::Result<PlanSamples> {
    let mut by_index: HashMap<&TensorIndex, f64> = HashMap::with_capacity(data.len());
    for (idx, v) in data.iter() {
        if let Some(prev) = by_index.insert(idx, v) {
            if prev.to_bits() != v.to_bits() {
                return Err(Error::Format(format!(
                    "index {idx} has two different values"
                )));
            }
        }
    }
    let pick = |indices: &[TensorIndex]| -> tenrec::Result<SampleData> {
        let missing: Vec<&TensorIndex> = indices
            .iter()
            .filter(|i| !by_index.contains_key(i))
            .collect();
        if let Some(first) = missing.first() {
            return Err(Error::Format(format!(
                "{} planned indices have no value, first {first}",
                missing.len()
            )));
        }
        SampleData::new(
            indices.to_vec(),
            indices.iter().map(|i| by_index[i]).collect(),
        )
    };
    let out = PlanSamples {
        training: pick(&plan.omega)?,
        validation: pick(&plan.omega_prime)?,
    };
    let used = out.training.len() + out.validation.len();
    if by_index.len() > used {
        log::warn!(
            "ignoring {} sample rows outside the plan",
            by_index.len() - used
        );
    }
    Ok(out)
}

/// Contents of `summary.toml`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunSummary {
    pub d: usize,
    pub n: usize,
    pub p: usize,
    #[serde(rename = "K")]
    pub basis_size: usize,
    pub omega_size: usize,
    pub validation_size: usize,
    pub rank: usize,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_pr: Option<f64>,
    pub terminated_by: String,
    pub iterations: usize,
    pub final_cost: f64,
    pub wall_time_s: f64,
    pub mean: f64,
    pub variance: f64,
    pub oracle: String,
    /// Largest absolute coefficient error against an oracle that knows its expansion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_error: Option<f64>,
    /// `‖c − c_true‖₂ / ‖c_true‖₂` for the same oracles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficient_rel_error: Option<f64>,
    pub undersampled_nodes: usize,
}

impl RunSummary {
    pub fn converged(&self) -> bool {
        self.terminated_by == Termination::Converged.as_str()
    }
}

pub struct RecoverReport {
    pub summary: RunSummary,
    pub result: RecoveryResult,
    pub out: PathBuf,
}

fn solve(
    run: &Run,
    samples: &PlanSamples,
    oracle: Option<&dyn Simulator>,
    rank: usize,
    lambda: f64,
) -> Result<(RunSummary, RecoveryResult), CliError> {
    let rc = run.cfg.recovery_config(rank, lambda, run.basis.len());
    let validation = (!samples.validation.is_empty()).then_some(&samples.validation);
    let start = Instant::now();
    let result = recover(&samples.training, &run.basis, &rc, validation)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    if !result.undersampled.is_empty() {
        log::warn!(
            "{} grid nodes are not touched by any training sample",
            result.undersampled.len()
        );
    }
    let (mean, variance) = result.coeffs.moments();
    let truth = oracle.and_then(|o| o.true_coefficients(&run.basis));
    let diffs = truth.as_ref().map(|t| {
        t.iter()
            .zip(result.coeffs.coeffs())
            .map(|(t, c)| (t - c).abs())
            .collect::<Vec<f64>>()
    });
    let coefficient_error = diffs
        .as_ref()
        .map(|e| e.iter().copied().fold(0.0, f64::max));
    let coefficient_rel_error = diffs.as_ref().zip(truth.as_ref()).map(|(e, t)| {
        e.iter().map(|v| v * v).sum::<f64>().sqrt() / t.iter().map(|v| v * v).sum::<f64>().sqrt()
    });
    let pr = &run.cfg.problem;
    let summary = RunSummary {
        d: pr.d,
        n: pr.n,
        p: pr.p,
        basis_size: run.basis.len(),
        omega_size: samples.training.len(),
        validation_size: samples.validation.len(),
        rank,
        lambda,
        eps_pr: result.prediction_error,
        terminated_by: result.terminated_by.as_str().to_string(),
        iterations: result.history.iterations(),
        final_cost: result.history.costs().last().copied().unwrap_or(f64::NAN),
        wall_time_s,
        mean,
        variance,
        oracle: run.cfg.oracle.name.clone(),
        coefficient_error,
        coefficient_rel_error,
        undersampled_nodes: result.undersampled.len(),
    };
    Ok((summary, result))
}

fn write_run(run: &Run, summary: &RunSummary, result: &RecoveryResult) -> Result<(), CliError> {
    let d = &run.cfg.density;
    let hist = result
        .coeffs
        .density_histogram(d.draws, d.bins, sub_seed(run.cfg.seed, "draws"))?;
    write_atomic(&run.out, COEFFICIENTS, |w| {
        io::write_coefficients(w, &result.coeffs)
    })?;
    write_atomic(&run.out, HISTORY, |w| io::write_history(w, &result.history))?;
    write_atomic(&run.out, DENSITY, |w| io::write_histogram(w, &hist))?;
    let text = toml::to_string(summary).map_err(|e| CliError::Config(e.to_string()))?;
    write_atomic(&run.out, SUMMARY, |w| Ok(w.write_all(text.as_bytes())?))
}

/// `tenrec recover`: one recovery at the configured `(r, λ)`.
pub fn cmd_recover(
    config: &Path,
    samples: Option<&Path>,
    ov: &Overrides,
) -> Result<RecoverReport, CliError> {
    let run = Run::load(config, ov)?;
    let plan = run.plan()?;
    let (data, oracle) = run.samples(&plan, samples)?;
    let (rank, lambda) = run.cfg.single_cell();
    let (summary, result) = solve(&run, &data, oracle.as_deref(), rank, lambda)?;
    write_run(&run, &summary, &result)?;
    Ok(RecoverReport {
        summary,
        result,
        out: run.out,
    })
}

/// One visited `(r, λ)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRow {
    pub rank: usize,
    pub lambda: f64,
    pub eps_pr: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub terminated_by: String,
}

pub struct SelectReport {
    pub rows: Vec<SelectionRow>,
    pub chosen: RecoverReport,
}

/// `tenrec select`: sweeps ranks ascending, then λ ascending, and keeps the
/// first converged cell whose prediction error meets the target.
pub fn cmd_select(
    config: &Path,
    samples: Option<&Path>,
    ov: &Overrides,
) -> Result<SelectReport, CliError> {
    let run = Run::load(config, ov)?;
    let sel = run
        .cfg
        .model_selection
        .clone()
        .ok_or_else(|| CliError::Config("select needs a [model_selection] section".into()))?;
    if run.cfg.validation_size() == 0 {
        return Err(CliError::Config(
            "model selection needs sampling.validation_size >= 1".into(),
        ));
    }
    let mut ranks = sel.r_grid.clone();
    ranks.sort_unstable();
    ranks.dedup();
    let mut lambdas = sel.lambda_grid.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();

    let plan = run.plan()?;
    let (data, oracle) = run.samples(&plan, samples)?;
    let mut rows = Vec::new();
    let mut chosen = None;
    'sweep: for &rank in &ranks {
        for &lambda in &lambdas {
            let (summary, result) = solve(&run, &data, oracle.as_deref(), rank, lambda)?;
            let eps_pr = summary.eps_pr.unwrap_or(f64::INFINITY);
            log::info!(
                "r = {rank}, lambda = {lambda}: eps_pr = {eps_pr:.3e}, {} after {} sweeps",
                summary.terminated_by,
                summary.iterations
            );
            rows.push(SelectionRow {
                rank,
                lambda,
                eps_pr,
                final_cost: summary.final_cost,
                iterations: summary.iterations,
                terminated_by: summary.terminated_by.clone(),
            });
            if summary.converged() && eps_pr <= sel.eps_pr_target {
                chosen = Some((summary, result));
                break 'sweep;
            }
        }
    }
    write_atomic(&run.out, SELECTION, |w| write_selection(w, &rows))?;
    match chosen {
        Some((summary, result)) => {
            write_run(&run, &summary, &result)?;
            Ok(SelectReport {
                rows,
                chosen: RecoverReport {
                    summary,
                    result,
                    out: run.out,
                },
            })
        }
        None => {
            let best = rows
                .iter()
                .min_by(|a, b| a.eps_pr.total_cmp(&b.eps_pr))
                .expect("grids are nonempty");
            Err(CliError::TargetNotMet {
                target: sel.eps_pr_target,
                rank: best.rank,
                lambda: best.lambda,
                eps_pr: best.eps_pr,
            })
        }
    }
}

fn write_selection(mut w: impl Write, rows: &[SelectionRow]) -> tenrec::Result<()> {
    writeln!(w, "rank,lambda,eps_pr,final_cost,iterations,terminated_by")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.rank, r.lambda, r.eps_pr, r.final_cost, r.iterations, r.terminated_by
        )?;
    }
    Ok(())
}

pub struct DensityReport {
    pub surrogate: Histogram,
    /// Oracle Monte Carlo on the surrogate's bin edges, when an oracle is configured.
    pub oracle: Option<Histogram>,
    pub out: PathBuf,
}

impl DensityReport {
    pub fn sup_difference(&self) -> Option<f64> {
        self.oracle
            .as_ref()
            .map(|o| self.surrogate.sup_difference(o))
    }
}

/// `tenrec density`: histogram of a saved expansion, plus the oracle's own
/// Monte Carlo histogram when one is configured.
pub fn cmd_density(
    config: &Path,
    coefficients: Option<&Path>,
    draws: Option<usize>,
    bins: Option<usize>,
    ov: &Overrides,
) -> Result<DensityReport, CliError> {
    let run = Run::load(config, ov)?;
    let draws = draws.unwrap_or(run.cfg.density.draws);
    let bins = bins.unwrap_or(run.cfg.density.bins);
    if draws == 0 || bins == 0 {
        return Err(CliError::Config("draws and bins must be >= 1".into()));
    }
    let path = coefficients
        .map(Path::to_path_buf)
        .unwrap_or_else(|| run.out.join(COEFFICIENTS));
    let expansion = io::read_coefficients(open(&path)?, &run.basis).map_err(CliError::at(&path))?;
    let surrogate = expansion.density_histogram(draws, bins, sub_seed(run.cfg.seed, "draws"))?;
    let oracle = match run.cfg.oracle(&run.basis)? {
        Some(o) => {
            let values = sample_outputs(
                run.basis.densities(),
                draws,
                // Same parameter draws as the surrogate, so the two histograms
                // differ by surrogate error rather than sampling noise.
                sub_seed(run.cfg.seed, "draws"),
                |x| {
                    o.evaluate(x).map_err(|message| Error::Oracle {
                        index: format!("{x:?}"),
                        message,
                    })
                },
            )?;
            Some(Histogram::from_values_on(&values, &surrogate.edges)?)
        }
        None => None,
    };
    write_atomic(&run.out, DENSITY, |w| io::write_histogram(w, &surrogate))?;
    if let Some(h) = &oracle {
        write_atomic(&run.out, ORACLE_DENSITY, |w| io::write_histogram(w, h))?;
    }
    Ok(DensityReport {
        surrogate,
        oracle,
        out: run.out,
    })
}

/// `tenrec plan-export`: writes the training and validation indices an
/// external simulator should evaluate.
pub fn cmd_plan_export(config: &Path, ov: &Overrides) -> Result<(SamplePlan, PathBuf), CliError> {
    let run = Run::load(config, ov)?;
    let plan = run.plan()?;
    let d = run.cfg.problem.d;
    write_atomic(&run.out, PLAN, |w| io::write_plan(w, d, &plan.omega))?;
    write_atomic(&run.out, PLAN_VALIDATION, |w| {
        io::write_plan(w, d, &plan.omega_prime)
    })?;
    Ok((plan, run.out))
}

/// `tenrec plan-import`: checks external results against the plan and
/// writes them in plan order (training rows first) as `samples.csv`.
pub fn cmd_plan_import(
    config: &Path,
    samples: &Path,
    ov: &Overrides,
) -> Result<(PlanSamples, PathBuf), CliError> {
    let run = Run::load(config, ov)?;
    let plan = run.plan()?;
    let pr = &run.cfg.problem;
    let data = io::read_samples(open(samples)?, pr.d, pr.n).map_err(CliError::at(samples))?;
    let matched = match_plan(&plan, &data).map_err(CliError::at(samples))?;
    let all = SampleData::new(
        matched
            .training
            .indices()
            .iter()
            .chain(matched.validation.indices())
            .cloned()
            .collect(),
        matched
            .training
            .values()
            .iter()
            .chain(matched.validation.values())
            .copied()
            .collect(),
    )?;
    write_atomic(&run.out, SAMPLES, |w| io::write_samples(w, pr.d, &all))?;
    Ok((matched, run.out))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::File {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes `dir/name` through a temporary file in `dir`, so a failed write
/// never leaves a partial artifact.
pub fn write_atomic(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<&mut File>) -> tenrec::Result<()>,
) -> Result<(), CliError> {
    let target = dir.join(name);
    let file_err = |source: std::io::Error| CliError::File {
        path: target.clone(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(file_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w).map_err(CliError::at(&target))?;
        w.flush().map_err(file_err)?;
    }
    tmp.persist(&target).map_err(|e| file_err(e.error))?;
    Ok(())
}
