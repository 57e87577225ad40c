//! Command-line runner for the verification suites.
//!
//! ```text
//! verify <suite> [--dim D] [--trunc N] [--grid L] [--seed S] [--tol T]
//!                [--out report.json] [--csv spectra.csv] [--config cfg.json]
//! ```
//!
//! Exit code 0 when every check passes, 1 on a numeric failure, 2 on usage
//! errors. All options can also be set through `VERIFY_*` environment
//! variables; a JSON config file provides defaults that explicit flags
//! override.

use biharm::harness::{self, SuiteConfig, SUITES};
use clap::Parser;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "verify",
    about = "Run named verification suites over the spectral-calculus library",
    after_help = "Suites: constants, harmonics, annulus-norms, lorentz, averaging,\n        poisson-wente, whitney, rellich, pohozaev, second-variation, all"
)]
struct Cli {
    /// Suite name
    suite: String,
    /// Restrict dimension-parametrized checks to one dimension (3 or 4)
    #[arg(long, env = "VERIFY_DIM")]
    dim: Option<u32>,
    /// Truncation degree for random spectral fields
    #[arg(long, env = "VERIFY_TRUNC")]
    trunc: Option<u32>,
    /// Angular quadrature level
    #[arg(long, env = "VERIFY_GRID")]
    grid: Option<u32>,
    /// Seed of the counter-based random generator
    #[arg(long, env = "VERIFY_SEED")]
    seed: Option<u64>,
    /// Base tolerance for quadrature cross-checks
    #[arg(long, env = "VERIFY_TOL")]
    tol: Option<f64>,
    /// Ensemble size for randomized checks
    #[arg(long, env = "VERIFY_ENSEMBLE")]
    ensemble: Option<usize>,
    /// Write the JSON report here
    #[arg(long, env = "VERIFY_OUT")]
    out: Option<std::path::PathBuf>,
    /// Write CSV rows here (eigen-spectra for the rellich suite, check rows
    /// otherwise)
    #[arg(long, env = "VERIFY_CSV")]
    csv: Option<std::path::PathBuf>,
    /// JSON config file with the same keys as the flags
    #[arg(long, env = "VERIFY_CONFIG")]
    config: Option<std::path::PathBuf>,
}

fn build_config(cli: &Cli) -> Result<SuiteConfig, String> {
    let mut config = SuiteConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config file: {e}"))?;
        let file: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("config file: {e}"))?;
        if let Some(v) = file.get("dim").and_then(|v| v.as_u64()) {
            config.dim = v as u32;
        }
        if let Some(v) = file.get("trunc").and_then(|v| v.as_u64()) {
            config.trunc = v as u32;
        }
        if let Some(v) = file.get("grid").and_then(|v| v.as_u64()) {
            config.grid = v as u32;
        }
        if let Some(v) = file.get("seed").and_then(|v| v.as_u64()) {
            config.seed = v;
        }
        if let Some(v) = file.get("tol").and_then(|v| v.as_f64()) {
            config.tol = v;
        }
        if let Some(v) = file.get("ensemble").and_then(|v| v.as_u64()) {
            config.ensemble = v as usize;
        }
    }
    if let Some(d) = cli.dim {
        config.dim = d;
    }
    if let Some(t) = cli.trunc {
        config.trunc = t;
    }
    if let Some(g) = cli.grid {
        config.grid = g;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(t) = cli.tol {
        config.tol = t;
    }
    if let Some(e) = cli.ensemble {
        config.ensemble = e;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !SUITES.contains(&cli.suite.as_str()) {
        eprintln!("error: unknown suite '{}'", cli.suite);
        eprintln!("known suites: {}", SUITES.join(", "));
        return ExitCode::from(2);
    }
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match harness::run_suite(&cli.suite, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    println!(
        "suite {}: {} checks, {} passed, {} failed ({} ms)",
        report.suite,
        report.checks.len(),
        report.summary.pass,
        report.summary.fail,
        report.wall_ms
    );
    for c in report.checks.iter().filter(|c| !c.pass) {
        println!(
            "  FAIL {}: lhs = {:.6e}, rhs = {:.6e}, margin = {:.3e}",
            c.lemma_id, c.lhs, c.rhs, c.margin
        );
    }
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, report.to_json_string()) {
            eprintln!("error writing report: {e}");
            return ExitCode::from(1);
        }
        println!("report written to {}", path.display());
    }
    if let Some(path) = &cli.csv {
        let csv = if cli.suite == "rellich" {
            match harness::rellich_spectra_csv(1.0, 50f64.exp(), 10, 40) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error exporting spectra: {e}");
                    return ExitCode::from(1);
                }
            }
        } else {
            report.to_csv()
        };
        if let Err(e) = std::fs::write(path, csv) {
            eprintln!("error writing csv: {e}");
            return ExitCode::from(1);
        }
        println!("csv written to {}", path.display());
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
