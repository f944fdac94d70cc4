//! Mesh-refinement sweeps over perturbed problems, the perturbation-stability
//! audit, and CSV/JSON emission of the results.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Mesh;
use crate::objective::Perturbation;
use crate::operators::norm_s_sq;
use crate::solvers::{
    solve_bangbang, solve_bruteforce_with, solve_pgd, SolveMethod, SolveReport, SolverOptions,
    BRUTE_FORCE_MAX_N,
};
use crate::ssc::DELTA_BOUND;
use crate::ConePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub h_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub method: SolveMethod,
    pub opts: SolverOptions,
    pub output_path: PathBuf,
    pub format: OutputFormat,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h_list.is_empty() || self.n_list.is_empty() {
            return Err(Error::InvalidConfig("h and n lists must be nonempty".into()));
        }
        for &h in &self.h_list {
            Perturbation::new(h)?;
        }
        if self.n_list.contains(&0) {
            return Err(Error::EmptyMesh);
        }
        if self.method == SolveMethod::Brute {
            if let Some(&n) = self.n_list.iter().find(|&&n| n > BRUTE_FORCE_MAX_N) {
                return Err(Error::TooLargeForBruteForce {
                    n,
                    max: BRUTE_FORCE_MAX_N,
                });
            }
        }
        self.opts.validate()
    }
}

/// One `(h, n)` record. Field order is the CSV column order.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub n: usize,
    pub t_star: f64,
    pub f_star: f64,
    pub norm_Su_sq: f64,
    pub norm_x: f64,
    pub sign_changes: usize,
    pub pontryagin_residual: f64,
    pub stationarity: f64,
    pub prop2_bound: f64,
    pub prop2_ok: bool,
}

pub const CSV_HEADER: &str = "h,n,t_star,f_star,norm_Su_sq,norm_x,sign_changes,pontryagin_residual,stationarity,prop2_bound,prop2_ok";

impl SweepRow {
    /// Builds a row from a solver report, auditing `‖z‖_X ≤ 2h/δ`.
    pub fn from_report(h: Perturbation, report: &SolveReport, delta: f64) -> Self {
        let z = &report.minimizer;
        let norm_x = z.norm_x();
        let prop2_bound = 2.0 / delta * h.h();
        SweepRow {
            h: h.h(),
            n: z.mesh().n(),
            t_star: z.t,
            f_star: report.objective,
            norm_Su_sq: norm_s_sq(&z.u),
            norm_x,
            sign_changes: report.sign_changes,
            pontryagin_residual: report.pontryagin_residual,
            stationarity: report.stationarity,
            prop2_bound,
            prop2_ok: norm_x <= prop2_bound,
        }
    }

    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(self.h),
            self.n,
            fmt_f64(self.t_star),
            fmt_f64(self.f_star),
            fmt_f64(self.norm_Su_sq),
            fmt_f64(self.norm_x),
            self.sign_changes,
            fmt_f64(self.pontryagin_residual),
            fmt_f64(self.stationarity),
            fmt_f64(self.prop2_bound),
            self.prop2_ok,
        )
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs `method` from its canonical start: all-plus signs for bangbang, the
/// projection of `(h, 0)` for pgd.
pub fn solve_canonical(
    method: SolveMethod,
    h: Perturbation,
    mesh: Mesh,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    match method {
        SolveMethod::Bangbang => solve_bangbang(h, mesh, &vec![1; mesh.n()], opts),
        SolveMethod::Pgd => {
            let start = crate::cone::project(&ConePoint::new(h.h(), crate::GridFunction::zeros(mesh)));
            solve_pgd(h, mesh, &start, opts)
        }
        SolveMethod::Brute => solve_bruteforce_with(h, mesh, opts),
    }
}

/// One row per `(h, n)` in the config's `h`-major order.
pub fn perturbation_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.h_list.len() * cfg.n_list.len());
    for &h in &cfg.h_list {
        let h = Perturbation::new(h)?;
        for &n in &cfg.n_list {
            let mesh = Mesh::new(n)?;
            let report = solve_canonical(cfg.method, h, mesh, &cfg.opts)?;
            rows.push(SweepRow::from_report(h, &report, DELTA_BOUND));
        }
    }
    Ok(rows)
}

/// Sweep, then write the rows to `cfg.output_path`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let rows = perturbation_sweep(cfg)?;
    write_rows(&rows, &cfg.output_path, cfg.format)?;
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRecord {
    #[serde(flatten)]
    pub row: SweepRow,
    pub delta: f64,
    /// `prop2_bound − norm_x`.
    pub slack: f64,
}

/// Solves the perturbed problem with the bang-bang iteration and checks the
/// stability estimate `‖z‖_X ≤ 2δ⁻¹‖x*‖` for the perturbation `x* = (−h, 0)`.
pub fn stability_report(h: Perturbation, mesh: Mesh, delta: f64) -> Result<StabilityRecord> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    let report = solve_canonical(SolveMethod::Bangbang, h, mesh, &SolverOptions::default())?;
    let row = SweepRow::from_report(h, &report, delta);
    Ok(StabilityRecord {
        slack: row.prop2_bound - row.norm_x,
        delta,
        row,
    })
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn render_json(rows: &[SweepRow]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows)?;
    s.push('\n');
    Ok(s)
}

/// Parses text produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::InvalidConfig("missing or unexpected CSV header".into())),
    }
    let bad = |line: &str| Error::InvalidConfig(format!("malformed CSV row: {line}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 11 {
                return Err(bad(line));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
            let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad(line));
            Ok(SweepRow {
                h: num(0)?,
                n: int(1)?,
                t_star: num(2)?,
                f_star: num(3)?,
                norm_Su_sq: num(4)?,
                norm_x: num(5)?,
                sign_changes: int(6)?,
                pontryagin_residual: num(7)?,
                stationarity: num(8)?,
                prop2_bound: num(9)?,
                prop2_ok: f[10].parse::<bool>().map_err(|_| bad(line))?,
            })
        })
        .collect()
}

/// Writes rows atomically: a temporary file in the target directory is
/// renamed over `path` only after the whole payload is flushed.
pub fn write_rows(rows: &[SweepRow], path: &Path, format: OutputFormat) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("refusing to write an empty sweep".into()));
    }
    let payload = match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows)?,
    };
    write_atomic(path, payload.as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(bytes).map_err(wrap)?;
    tmp.flush().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}
