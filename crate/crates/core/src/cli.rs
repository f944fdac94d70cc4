//! The `ssc-lab` command line: JSON on stdout, a one-line summary on stderr.
//!
//! Exit codes: `0` success, `1` runtime failure (including failed checks and
//! unwritable output paths), `2` invalid arguments.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cone::ConePoint;
use crate::error::Error;
use crate::experiments::{run_sweep, stability_report, OutputFormat, SweepConfig};
use crate::grid::Mesh;
use crate::objective::Perturbation;
use crate::solvers::{
    seeded_starts, solve_bangbang, solve_bruteforce_with, solve_pgd, SolveMethod, SolveReport,
    SolverOptions,
};
use crate::ssc::{check_stationarity, coercivity_estimate, growth_estimate, CoercivityReport, BETA_BOUND, DELTA_BOUND};

const STATIONARITY_TOL: f64 = 1e-12;
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "ssc-lab",
    version,
    about = "Second-order sufficient conditions without perturbation stability: a finite-dimensional laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check stationarity and coercivity of the Hessian at the apex.
    VerifySsc {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Minimize the perturbed functional on one mesh.
    Solve {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, value_enum, default_value_t = SolveMethod::Bangbang)]
        method: SolveMethod,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve over a grid of perturbations and meshes and write the rows.
    Sweep {
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long = "h-list", value_delimiter = ',', required = true, allow_negative_numbers = true)]
        h_list: Vec<f64>,
        #[arg(long, value_enum, default_value_t = SolveMethod::Bangbang)]
        method: SolveMethod,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Estimate the quadratic-growth constant at the apex.
    Growth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Audit the perturbation-stability estimate for one perturbed problem.
    Stability {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, default_value_t = DELTA_BOUND, allow_negative_numbers = true)]
        delta: f64,
    },
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.max_iter,
            tolerance: self.tol,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    n: usize,
    samples: usize,
    seed: u64,
    stationarity: f64,
    coercivity: CoercivityReport,
    passed: bool,
}

#[derive(Serialize)]
struct SolveOutput {
    n: usize,
    h: f64,
    t_star: f64,
    f_star: f64,
    #[serde(flatten)]
    report: SolveReport,
}

#[derive(Serialize)]
struct SweepOutput {
    out: String,
    format: OutputFormat,
    rows: usize,
    all_prop2_ok: bool,
    method: SolveMethod,
}

#[derive(Serialize)]
struct GrowthOutput {
    n: usize,
    seed: u64,
    #[serde(flatten)]
    report: crate::ssc::GrowthReport,
    passed: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyMesh
            | Error::NegativePerturbation(_)
            | Error::InvalidConfig(_)
            | Error::TooLargeForBruteForce { .. }
            | Error::SignPatternLength { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(String, String, bool), Failure>;

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command) {
        Ok((json, summary, ok)) => {
            let _ = writeln!(stdout, "{json}");
            let _ = writeln!(stderr, "{summary}");
            if ok {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn mesh(n: usize) -> std::result::Result<Mesh, Failure> {
    Mesh::new(n).map_err(|_| Failure::Usage("--n must be at least 1".into()))
}

fn positive_samples(samples: usize) -> std::result::Result<(), Failure> {
    if samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> std::result::Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::VerifySsc { n, samples, seed } => {
            let mesh = mesh(n)?;
            positive_samples(samples)?;
            let stationarity = check_stationarity(Perturbation::unperturbed(), &ConePoint::apex(mesh))?;
            let coercivity = coercivity_estimate(mesh, samples, seed)?;
            let passed =
                stationarity <= STATIONARITY_TOL && coercivity.beta_estimate >= BETA_BOUND - BOUND_SLACK;
            let summary = format!(
                "verify-ssc n={n}: stationarity={stationarity:e} beta_estimate={:.6} (bound {:.6}) -> {}",
                coercivity.beta_estimate,
                BETA_BOUND,
                if passed { "ok" } else { "FAILED" }
            );
            let out = VerifyOutput {
                n,
                samples,
                seed,
                stationarity,
                coercivity,
                passed,
            };
            Ok((to_json(&out)?, summary, passed))
        }
        Command::Solve { n, h, method, solver } => {
            let mesh = mesh(n)?;
            let h = Perturbation::new(h)?;
            let opts = solver.options();
            opts.validate()?;
            let report = match method {
                SolveMethod::Brute => solve_bruteforce_with(h, mesh, &opts)?,
                SolveMethod::Bangbang => solve_bangbang(h, mesh, &vec![1; n], &opts)?,
                SolveMethod::Pgd => {
                    let start = &seeded_starts(mesh, 1, opts.seed)[0];
                    solve_pgd(h, mesh, start, &opts)?
                }
            };
            let ok = report.converged;
            let summary = format!(
                "solve n={n} h={} method={method}: t*={:.12} f*={:.12} iterations={} converged={ok}",
                h.h(),
                report.minimizer.t,
                report.objective,
                report.iterations
            );
            let out = SolveOutput {
                n,
                h: h.h(),
                t_star: report.minimizer.t,
                f_star: report.objective,
                report,
            };
            Ok((to_json(&out)?, summary, ok))
        }
        Command::Sweep {
            n_list,
            h_list,
            method,
            out,
            format,
            solver,
        } => {
            let cfg = SweepConfig {
                h_list,
                n_list,
                method,
                opts: solver.options(),
                output_path: out.clone(),
                format,
            };
            let rows = run_sweep(&cfg)?;
            let all_ok = rows.iter().all(|r| r.prop2_ok);
            let summary = format!("sweep: wrote {} rows to {}", rows.len(), out.display());
            let out = SweepOutput {
                out: out.display().to_string(),
                format,
                rows: rows.len(),
                all_prop2_ok: all_ok,
                method,
            };
            Ok((to_json(&out)?, summary, true))
        }
        Command::Growth {
            n,
            samples,
            epsilon,
            seed,
        } => {
            let mesh = mesh(n)?;
            positive_samples(samples)?;
            let report = growth_estimate(mesh, epsilon, samples, seed)?;
            let passed = report.delta_estimate >= DELTA_BOUND - BOUND_SLACK;
            let summary = format!(
                "growth n={n}: delta_estimate={:.6} (bound {DELTA_BOUND}) -> {}",
                report.delta_estimate,
                if passed { "ok" } else { "FAILED" }
            );
            let out = GrowthOutput {
                n,
                seed,
                report,
                passed,
            };
            Ok((to_json(&out)?, summary, passed))
        }
        Command::Stability { n, h, delta } => {
            let mesh = mesh(n)?;
            let h = Perturbation::new(h)?;
            let record = stability_report(h, mesh, delta)?;
            let ok = record.row.prop2_ok;
            let summary = format!(
                "stability n={n} h={}: |z|={:.6} bound={:.6} -> {}",
                h.h(),
                record.row.norm_x,
                record.row.prop2_bound,
                if ok { "ok" } else { "FAILED" }
            );
            Ok((to_json(&record)?, summary, ok))
        }
    }
}
