//! Command-line driver: configuration, plan export/import, recovery,
//! model selection, density reports and simulation-cost counts.
//!
//! Exit statuses are listed in [`error::exit`].

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod counts;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::commands::Overrides;
use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "tenrec",
    version,
    about = "Sparse polynomial-chaos surrogates from low-rank tensor recovery"
)]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a surrogate at the configured rank and lambda.
    Recover(RunArgs),
    /// Sweep the model-selection grid and keep the first cell meeting the target.
    Select(RunArgs),
    /// Print the full tensor-grid size n^d and the basis size K.
    Counts {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
    },
    /// Histogram of a saved expansion, with an oracle Monte Carlo companion.
    Density(DensityArgs),
    /// Write the sample plan for an external simulator.
    PlanExport(CommonArgs),
    /// Check external simulator results against the plan.
    PlanImport(ImportArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sample values from an external simulator.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Defaults to coefficients.csv in the output directory.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub samples: PathBuf,
}

/// Parses arguments, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command, printing its report to stdout.
pub fn run(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Recover(a) => {
            let r = commands::cmd_recover(
                &a.common.config,
                a.samples.as_deref(),
                &a.common.overrides(),
            )?;
            print_summary(&r.summary, &r.out);
            Ok(if r.summary.converged() {
                exit::SUCCESS
            } else {
                exit::MAX_ITERATIONS
            })
        }
        Command::Select(a) => {
            let r = commands::cmd_select(
                &a.common.config,
                a.samples.as_deref(),
                &a.common.overrides(),
            )?;
            for row in &r.rows {
                println!(
                    "r = {}, lambda = {}: eps_pr = {:.3e}, cost = {:.6e}, {} sweeps, {}",
                    row.rank,
                    row.lambda,
                    row.eps_pr,
                    row.final_cost,
                    row.iterations,
                    row.terminated_by
                );
            }
            println!(
                "selected r = {}, lambda = {}",
                r.chosen.summary.rank, r.chosen.summary.lambda
            );
            print_summary(&r.chosen.summary, &r.chosen.out);
            Ok(exit::SUCCESS)
        }
        Command::Counts { d, n, p } => {
            if *d == 0 || *n == 0 {
                return Err(CliError::Config("counts needs d >= 1 and n >= 1".into()));
            }
            println!("{}", counts::report(*d, *n, *p));
            Ok(exit::SUCCESS)
        }
        Command::Density(a) => {
            let r = commands::cmd_density(
                &a.common.config,
                a.coefficients.as_deref(),
                a.draws,
                a.bins,
                &a.common.overrides(),
            )?;
            println!(
                "{} bins over [{}, {}] written to {}",
                r.surrogate.bins(),
                r.surrogate.edges[0],
                r.surrogate.edges[r.surrogate.bins()],
                r.out.display()
            );
            if let Some(sup) = r.sup_difference() {
                println!("sup |surrogate - oracle| density difference = {sup:.4e}");
            }
            Ok(exit::SUCCESS)
        }
        Command::PlanExport(a) => {
            let (plan, out) = commands::cmd_plan_export(&a.config, &a.overrides())?;
            println!(
                "{} training and {} validation indices written to {}",
                plan.omega.len(),
                plan.omega_prime.len(),
                out.display()
            );
            Ok(exit::SUCCESS)
        }
        Command::PlanImport(a) => {
            let (s, out) =
                commands::cmd_plan_import(&a.common.config, &a.samples, &a.common.overrides())?;
            println!(
                "{} training and {} validation values matched; written to {}",
                s.training.len(),
                s.validation.len(),
                out.join(commands::SAMPLES).display()
            );
            Ok(exit::SUCCESS)
        }
    }
}

fn print_summary(s: &commands::RunSummary, out: &std::path::Path) {
    println!(
        "K = {}, |Omega| = {}, |Omega'| = {}",
        s.basis_size, s.omega_size, s.validation_size
    );
    println!("r = {}, lambda = {}", s.rank, s.lambda);
    match s.eps_pr {
        Some(e) => println!("eps_pr = {e:.4e}"),
        None => println!("eps_pr = n/a (no validation set)"),
    }
    println!(
        "{} after {} sweeps, {:.3} s",
        s.terminated_by, s.iterations, s.wall_time_s
    );
    println!("mean = {:.10e}, variance = {:.10e}", s.mean, s.variance);
    if let Some(e) = s.coefficient_error {
        println!("max coefficient error vs oracle = {e:.3e}");
    }
    if let Some(e) = s.coefficient_rel_error {
        println!("relative coefficient error vs oracle = {e:.3e}");
    }
    println!("artifacts in {}", out.display());
}
