use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use tenrec::io;
use tenrec::rng::sub_seed;
use tenrec::sampling::{OracleParams, PlantedGpc};
use tenrec::{BasisSet, DensitySpec, GpcExpansion};
use tenrec_cli::commands::RunSummary;
use tenrec_cli::error::exit;

fn tenrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tenrec"))
        .args(args)
        .output()
        .unwrap()
}

fn config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    let text = format!("output_dir = \"{}\"\n{body}", dir.join("out").display());
    std::fs::write(&path, text).unwrap();
    path
}

fn summary(out: &Path) -> RunSummary {
    toml::from_str(&std::fs::read_to_string(out.join("summary.toml")).unwrap()).unwrap()
}

const SMALL: &str = r#"
seed = 4
[problem]
d = 4
n = 3
p = 2
[oracle]
name = "planted-gpc"
[sampling]
omega_size = 60
validation_size = 15
[recovery]
rank = 2
lambda = 0.01
"#;

const FULL_GRID: &str = r#"
seed = 5
[problem]
d = 5
n = 3
p = 2
density = { kind = "uniform", lower = -1.0, upper = 1.0 }
[oracle]
name = "planted-gpc"
[sampling]
omega_size = 243
validation_size = 0
[recovery]
rank = 3
lambda = 1e-8
"#;

#[test]
fn missing_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = tenrec(&[
        "recover",
        "--config",
        "no-such.toml",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(!out.exists());
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "seed = \"seven\"\n");
    let o = tenrec(&["recover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn full_grid_recovers_planted_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), FULL_GRID);
    let o = tenrec(&["recover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(exit::SUCCESS),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let out = dir.path().join("out");
    let basis =
        Arc::new(BasisSet::isotropic(5, 2, DensitySpec::uniform(-1.0, 1.0).unwrap(), 3).unwrap());
    let terms = OracleParams::default().terms;
    let planted = PlantedGpc::low_rank(basis.clone(), terms, sub_seed(5, "oracle")).unwrap();
    let file = std::fs::File::open(out.join("coefficients.csv")).unwrap();
    let got = io::read_coefficients(file, &basis).unwrap();
    for (c, t) in got.coeffs().iter().zip(planted.expansion().coeffs()) {
        assert!((c - t).abs() <= 1e-6, "{c} vs {t}");
    }
    let s = summary(&out);
    assert_eq!(s.basis_size, 21);
    assert_eq!(s.omega_size, 243);
    assert!((s.mean - planted.expansion().coeffs()[0]).abs() <= 1e-6);
    assert!(s.eps_pr.is_none());

    let history = io::read_history(std::fs::File::open(out.join("history.csv")).unwrap()).unwrap();
    assert_eq!(history.iterations(), s.iterations);
    io::read_histogram(std::fs::File::open(out.join("density.csv")).unwrap()).unwrap();
}

#[test]
fn seed_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let run = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let o = tenrec(&[
            "recover",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            o.status.code() == Some(exit::SUCCESS) || o.status.code() == Some(exit::MAX_ITERATIONS)
        );
        std::fs::read(out.join("coefficients.csv")).unwrap()
    };
    let a = run("4", "a");
    assert_eq!(a, run("4", "b"));
    assert_ne!(a, run("9", "c"));
}

#[test]
fn loose_target_selects_first_cell() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{SMALL}\n[model_selection]\nr_grid = [2, 1]\nlambda_grid = [0.1, 0.001]\neps_pr_target = 1.0\n"
    );
    let cfg = config(dir.path(), &body);
    let o = tenrec(&["select", "--config", cfg.to_str().unwrap()]);
    let out = dir.path().join("out");
    let table = std::fs::read_to_string(out.join("selection.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(
        rows[0],
        "rank,lambda,eps_pr,final_cost,iterations,terminated_by"
    );
    assert_eq!(o.status.code(), Some(exit::SUCCESS), "{table}");
    assert_eq!(rows.len(), 2, "{table}");
    assert!(rows[1].starts_with("1,0.001,"), "{table}");
    let s = summary(&out);
    assert_eq!((s.rank, s.lambda), (1, 0.001));
}

#[test]
fn unreachable_target_reports_best_cell() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{SMALL}\n[model_selection]\nr_grid = [1]\nlambda_grid = [0.01]\neps_pr_target = 1e-300\n"
    );
    let cfg = config(dir.path(), &body);
    let o = tenrec(&["select", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::TARGET_NOT_MET));
    assert!(String::from_utf8_lossy(&o.stderr).contains("best was r = 1"));
    assert!(!dir.path().join("out").join("coefficients.csv").exists());
}

#[test]
fn selection_without_validation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{}\n[model_selection]\nr_grid = [1]\nlambda_grid = [0.01]\neps_pr_target = 0.1\n",
        SMALL.replace("validation_size = 15", "validation_size = 0")
    );
    let cfg = config(dir.path(), &body);
    let o = tenrec(&["select", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::CONFIG));
}

#[test]
fn infeasible_plan_has_its_own_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &SMALL.replace("omega_size = 60", "omega_size = 80"),
    );
    let o = tenrec(&["recover", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::INFEASIBLE_PLAN));
}

#[test]
fn constant_expansion_gives_single_bin() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("name = \"planted-gpc\"", "name = \"external\"");
    let cfg = config(dir.path(), &body);
    let basis = Arc::new(BasisSet::isotropic(4, 2, DensitySpec::standard_gaussian(), 3).unwrap());
    let mut coeffs = vec![0.0; basis.len()];
    coeffs[0] = 2.5;
    let coeff_path = dir.path().join("constant.csv");
    let f = std::fs::File::create(&coeff_path).unwrap();
    io::write_coefficients(f, &GpcExpansion::new(basis, coeffs).unwrap()).unwrap();

    let run = || {
        let o = tenrec(&[
            "density",
            "--config",
            cfg.to_str().unwrap(),
            "--coefficients",
            coeff_path.to_str().unwrap(),
            "--draws",
            "1000",
        ]);
        assert_eq!(
            o.status.code(),
            Some(exit::SUCCESS),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read(dir.path().join("out").join("density.csv")).unwrap()
    };
    let first = run();
    let h = io::read_histogram(first.as_slice()).unwrap();
    assert_eq!(h.bins(), 1);
    assert!(h.edges[0] < 2.5 && 2.5 < h.edges[1]);
    assert_eq!(first, run());
    assert!(!dir.path().join("out").join("oracle_density.csv").exists());
}

#[test]
fn surrogate_density_matches_oracle_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), FULL_GRID);
    let cfg = cfg.to_str().unwrap();
    assert_eq!(
        tenrec(&["recover", "--config", cfg]).status.code(),
        Some(exit::SUCCESS)
    );
    let o = tenrec(&["density", "--config", cfg]);
    assert_eq!(o.status.code(), Some(exit::SUCCESS));
    let out = dir.path().join("out");
    let read =
        |name: &str| io::read_histogram(std::fs::File::open(out.join(name)).unwrap()).unwrap();
    let surrogate = read("density.csv");
    let oracle = read("oracle_density.csv");
    assert_eq!(surrogate.edges, oracle.edges);
    assert!(surrogate.sup_difference(&oracle) <= 0.05);
}

#[test]
fn coefficient_count_mismatch_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let other = Arc::new(BasisSet::isotropic(3, 2, DensitySpec::standard_gaussian(), 3).unwrap());
    let path = dir.path().join("wrong.csv");
    let n = other.len();
    io::write_coefficients(
        std::fs::File::create(&path).unwrap(),
        &GpcExpansion::new(other, vec![1.0; n]).unwrap(),
    )
    .unwrap();
    let o = tenrec(&[
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--coefficients",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(exit::IO));
}

#[test]
fn external_round_trip_through_plan_files() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("name = \"planted-gpc\"", "name = \"external\"");
    let cfg = config(dir.path(), &body);
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().join("out");

    let o = tenrec(&["recover", "--config", cfg]);
    assert_eq!(o.status.code(), Some(exit::CONFIG));

    assert_eq!(
        tenrec(&["plan-export", "--config", cfg]).status.code(),
        Some(exit::SUCCESS)
    );
    // Play the external simulator: y = 1 + i1 * i2 on 1-based indices.
    let mut rows = String::from("i1,i2,i3,i4,value\n");
    for name in ["plan_validation.csv", "plan.csv"] {
        let idx = io::read_plan(std::fs::File::open(out.join(name)).unwrap(), 4, 3).unwrap();
        for i in idx {
            let c = i.one_based();
            rows.push_str(&format!(
                "{},{},{},{},{}\n",
                c[0],
                c[1],
                c[2],
                c[3],
                1 + c[0] * c[1]
            ));
        }
    }
    let results = dir.path().join("results.csv");
    std::fs::write(&results, &rows).unwrap();

    let o = tenrec(&[
        "plan-import",
        "--config",
        cfg,
        "--samples",
        results.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(exit::SUCCESS),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let imported = out.join("samples.csv");
    let o = tenrec(&[
        "recover",
        "--config",
        cfg,
        "--samples",
        imported.to_str().unwrap(),
    ]);
    assert!(matches!(
        o.status.code(),
        Some(exit::SUCCESS) | Some(exit::MAX_ITERATIONS)
    ));
    let s = summary(&out);
    assert_eq!((s.omega_size, s.validation_size), (60, 15));
    assert!(s.eps_pr.is_some());

    // Dropping a planned row is reported as a format error.
    let short: String = rows
        .lines()
        .take(rows.lines().count() - 1)
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&results, short).unwrap();
    let o = tenrec(&[
        "plan-import",
        "--config",
        cfg,
        "--samples",
        results.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(exit::IO));
}

#[test]
fn counts_prints_table_values() {
    let o = tenrec(&["counts", "--d", "57"]);
    assert_eq!(o.status.code(), Some(exit::SUCCESS));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("1.6×10^27"));
    assert!(text.contains("K = 1711"));
    assert_eq!(tenrec(&["counts"]).status.code(), Some(exit::USAGE));
}
