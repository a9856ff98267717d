use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alexgeo::barycenter::{solve_barycenter, BarycenterOptions, DiscreteMeasure};
use alexgeo::campaign::run_campaign;
use alexgeo::comparison::{estimate_curvature_lower_bound, AuditOptions};
use alexgeo::{FiniteMetric, GeoError, Verdict};
use clap::{Parser, Subcommand};

/// Exit status for configuration and IO problems.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "alexgeo", version, about = "Curvature audits, barycenters and Jensen checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign of Jensen-inequality checks.
    Jensen {
        /// Campaign configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Per-trial reports (JSON).
        #[arg(long)]
        out: PathBuf,
        /// One-row-per-trial summary.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Worker threads; output does not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Solve for the barycenter of a finitely supported measure.
    Barycenter {
        /// Measure file: {"space": ..., "points": [...], "weights": [...]}.
        #[arg(long)]
        measure: PathBuf,
        /// Stopping tolerance on the mean log [default: 1e-10].
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate a lower curvature bound for a distance matrix.
    CurvAudit {
        /// Square CSV distance matrix, no header.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        kappa_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        kappa_max: f64,
        /// Sampled quadruples per curvature candidate [default: 50000].
        #[arg(long)]
        budget: Option<usize>,
        /// Sampling seed [default: 0, or ALEXGEO_SEED].
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn seed_override() -> Result<Option<u64>, GeoError> {
    match std::env::var("ALEXGEO_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| GeoError::Parse(format!("ALEXGEO_SEED={s:?}: {e}"))),
        Err(_) => Ok(None),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), GeoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| GeoError::Io(format!("{}: {e}", path.display())))
}

fn jensen(config: &Path, out: &Path, csv: Option<&Path>, jobs: usize) -> Result<u8, GeoError> {
    let outcome = run_campaign(config, out, csv, jobs, seed_override()?)?;
    eprintln!(
        "{} trials: {} holds, {} violated, {} alpha refuted, {} failed",
        outcome.reports.len(),
        outcome.count(Verdict::Holds),
        outcome.count(Verdict::Violated),
        outcome.count(Verdict::AlphaRefuted),
        outcome.count(Verdict::Failed),
    );
    if let Some(g) = outcome.min_gap() {
        eprintln!("min gap {g:e}");
    }
    Ok(outcome.exit_code() as u8)
}

fn barycenter(measure: &Path, tol: Option<f64>, out: &Path) -> Result<u8, GeoError> {
    let text = std::fs::read_to_string(measure)
        .map_err(|e| GeoError::Io(format!("{}: {e}", measure.display())))?;
    let mu: DiscreteMeasure = serde_json::from_str(&text)?;
    let mut opts = BarycenterOptions::default();
    if let Some(t) = tol {
        opts.tol = t;
    }
    match solve_barycenter(&mu, &opts) {
        Ok(r) => {
            write_json(out, &r)?;
            eprintln!(
                "converged in {} iterations, residual {:e}, variance {}",
                r.iterations, r.residual, r.variance_at_point
            );
            Ok(0)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(1)
        }
    }
}

fn curv_audit(
    matrix: &Path,
    lo: f64,
    hi: f64,
    budget: Option<usize>,
    seed: Option<u64>,
    out: &Path,
) -> Result<u8, GeoError> {
    let m = FiniteMetric::from_csv_path(matrix)?;
    let mut opts = AuditOptions::default();
    if let Some(b) = budget {
        opts.budget = b;
    }
    if let Some(s) = seed.or(seed_override()?) {
        opts.seed = s;
    }
    let idx: Vec<usize> = (0..m.len()).collect();
    let report = estimate_curvature_lower_bound(&m, &idx, lo, hi, &opts)?;
    write_json(out, &report)?;
    eprintln!(
        "kappa_max estimate {} ({} violations at {})",
        report.kappa_max_estimate, report.violations_total, report.kappa_tested
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Jensen {
            config,
            out,
            csv,
            jobs,
        } => jensen(config, out, csv.as_deref(), *jobs),
        Command::Barycenter { measure, tol, out } => barycenter(measure, *tol, out),
        Command::CurvAudit {
            matrix,
            kappa_min,
            kappa_max,
            budget,
            seed,
            out,
        } => curv_audit(matrix, *kappa_min, *kappa_max, *budget, *seed, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
