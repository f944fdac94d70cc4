//! Minimizers of `f_h` over `C` by three independent routes:
//!
//! * `pgd`: projected gradient descent in the X-metric;
//! * `bangbang`: fixed-point iteration on sign patterns driven by the
//!   maximum principle (`u = −t·sign` of the switching function);
//! * `brute`: exhaustive enumeration of sign patterns.
//!
//! The last two rest on the vertex reduction: for fixed `t` the `u`-part
//! `‖Su‖² − ½‖u‖²` is concave whenever `2‖S*S‖ < 1`, so its minimum over
//! the box `[−t, t]ⁿ` sits at a vertex `u = tσ`. For a pattern `σ` with
//! `m = ‖Sσ‖²` the best scale is `t(σ) = h/(1 + 2m)` and the objective is
//! `−h²/(2 + 4m)`.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{ensure_feasible, inner_x, project, ConePoint};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Mesh};
use crate::objective::{gradient, hessian_form, value, Perturbation};
use crate::operators::{apply_sstar_s, gram_entry, op_norm_sstar_s, scaled_gram_entry};
use crate::ssc::{check_stationarity, vertex_patterns};

/// Largest mesh accepted by [`solve_bruteforce`].
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Backtracking gives up below this step length.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Pgd,
    Bangbang,
    Brute,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMethod::Pgd => "pgd",
            SolveMethod::Bangbang => "bangbang",
            SolveMethod::Brute => "brute",
        })
    }
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgd" => Ok(SolveMethod::Pgd),
            "bangbang" => Ok(SolveMethod::Bangbang),
            "brute" => Ok(SolveMethod::Brute),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    Fixed,
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stationarity tolerance; also the dead zone of the switching function.
    pub tolerance: f64,
    pub step_rule: StepRule,
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 100_000,
            tolerance: 1e-10,
            step_rule: StepRule::Backtracking,
            // 1/L for the X-gradient, whose Lipschitz constant is 2.
            initial_step: 0.5,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.initial_step.is_nan() || self.initial_step <= 0.0 {
            return Err(Error::InvalidConfig("initial_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub minimizer: ConePoint,
    pub objective: f64,
    pub method: SolveMethod,
    pub iterations: usize,
    pub stationarity: f64,
    pub pontryagin_residual: f64,
    /// Cells with `|u_i| < t` (interior of the pointwise box).
    pub non_vertex_cells: usize,
    pub sign_changes: usize,
    pub converged: bool,
    /// Number of sign patterns attaining the reported objective (brute only,
    /// 1 otherwise).
    pub tied_optima: usize,
}

impl SolveReport {
    fn assemble(
        h: Perturbation,
        method: SolveMethod,
        minimizer: ConePoint,
        iterations: usize,
        finished: bool,
        opts: &SolverOptions,
    ) -> Result<Self> {
        let stationarity = check_stationarity(h, &minimizer)?;
        let pontryagin = pontryagin_check(&minimizer, opts.tolerance)?;
        Ok(SolveReport {
            objective: value(h, &minimizer),
            method,
            iterations,
            stationarity,
            pontryagin_residual: pontryagin.residual,
            non_vertex_cells: pontryagin.non_vertex_cells,
            sign_changes: minimizer.u.sign_changes(),
            converged: finished && stationarity <= opts.tolerance,
            tied_optima: 1,
            minimizer,
        })
    }
}

/// Discrete switching function `w̃ = S*Su − diag(G)/Δ · u`.
///
/// On cell `i`, with all other cells frozen, the objective restricted to
/// `u_i` is `Δ[2w̃_i·u_i + (G_ii/Δ − ½)·u_i²]`. The quadratic coefficient is
/// negative, so the cell minimizer over `[−t, t]` is `−t·sign(w̃_i)`. The
/// correction `G_ii/Δ = O(Δ)` is the cell's action on itself and vanishes
/// under refinement, leaving the continuous multiplier `S*Su`.
pub fn switching_function(u: &GridFunction) -> GridFunction {
    let mesh = *u.mesh();
    let d = mesh.width();
    let w = apply_sstar_s(u);
    GridFunction::from_fn(mesh, |i| {
        w.values()[i] - gram_entry(&mesh, i + 1, i + 1) / d * u.values()[i]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PontryaginCheck {
    pub residual: f64,
    pub non_vertex_cells: usize,
}

/// Deviation of a feasible point from the pointwise rule
/// `u_i = −t·sign(w̃_i)`; cells with `|w̃_i| ≤ tol` only need `|u_i| ≤ t`.
pub fn pontryagin_check(p: &ConePoint, tol: f64) -> Result<PontryaginCheck> {
    ensure_feasible(p)?;
    let t = p.t;
    let w = switching_function(&p.u);
    let mut residual: f64 = 0.0;
    let mut non_vertex_cells = 0;
    for (&ui, &wi) in p.u.values().iter().zip(w.values()) {
        if (ui.abs() - t).abs() > tol {
            non_vertex_cells += 1;
        }
        let r = if wi.abs() > tol {
            (ui + t * wi.signum()).abs()
        } else {
            (ui.abs() - t).max(0.0)
        };
        residual = residual.max(r);
    }
    Ok(PontryaginCheck {
        residual,
        non_vertex_cells,
    })
}

pub fn pontryagin_residual(p: &ConePoint, tol: f64) -> Result<f64> {
    Ok(pontryagin_check(p, tol)?.residual)
}

/// `t(σ) = h/(1 + 2m)`, the minimizer of `t²(½ + m) − h·t` over `t ≥ 0`.
pub fn pattern_scale(h: Perturbation, norm_s_sq_sigma: f64) -> f64 {
    h.h() / (1.0 + 2.0 * norm_s_sq_sigma)
}

/// `−h²/(2 + 4m)`, the objective at `(t(σ), t(σ)σ)`.
pub fn pattern_objective(h: Perturbation, norm_s_sq_sigma: f64) -> f64 {
    -h.h() * h.h() / (2.0 + 4.0 * norm_s_sq_sigma)
}

fn validate_signs(mesh: &Mesh, signs: &[i8]) -> Result<()> {
    if signs.len() != mesh.n() {
        return Err(Error::SignPatternLength {
            expected: mesh.n(),
            got: signs.len(),
        });
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidConfig("sign entries must be +1 or -1".into()));
    }
    Ok(())
}

/// Random point of `C`: `t ~ U(0, 1]`, `u_i ~ U[−t, t]`.
pub fn random_feasible_point(mesh: Mesh, rng: &mut impl Rng) -> ConePoint {
    let t: f64 = rng.gen_range(f64::EPSILON..=1.0);
    ConePoint::new(t, GridFunction::from_fn(mesh, |_| rng.gen_range(-t..=t)))
}

/// `count` random feasible starts drawn from `seed`.
pub fn seeded_starts(mesh: Mesh, count: usize, seed: u64) -> Vec<ConePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_feasible_point(mesh, &mut rng)).collect()
}

/// Projected gradient descent from a feasible start.
pub fn solve_pgd(
    h: Perturbation,
    mesh: Mesh,
    start: &ConePoint,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    Ok(solve_pgd_traced(h, mesh, start, opts)?.0)
}

/// [`solve_pgd`] that also returns the objective after every iteration.
pub fn solve_pgd_traced(
    h: Perturbation,
    mesh: Mesh,
    start: &ConePoint,
    opts: &SolverOptions,
) -> Result<(SolveReport, Vec<f64>)> {
    opts.validate()?;
    mesh.ensure_same(start.mesh())?;
    ensure_feasible(start)?;

    let mut x = project(start);
    let mut history = vec![value(h, &x)];
    let mut finished = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        let g = gradient(h, &x);
        if crate::cone::stationarity_residual(&x, &g)? <= opts.tolerance {
            finished = true;
            break;
        }
        let mut step = opts.initial_step;
        let accepted = loop {
            let y = project(&x.axpy(-step, &g)?);
            // f is quadratic, so its change along d = y − x is exactly
            // ⟨∇f, d⟩ + ½f''d². Subtracting two values of f would lose the
            // decrease to rounding once it drops below ulp(f).
            let d = y.axpy(-1.0, &x)?;
            let change = inner_x(&g, &d)? + 0.5 * hessian_form(&d);
            if opts.step_rule == StepRule::Fixed || change <= 0.0 {
                let fy = value(h, &y);
                break Some((y, fy));
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some((y, fy)) = accepted else { break };
        x = y;
        history.push(fy);
        iterations += 1;
    }
    let report = SolveReport::assemble(h, SolveMethod::Pgd, x, iterations, finished, opts)?;
    Ok((report, history))
}

/// Best of several pgd runs: lowest objective, earlier start on ties.
pub fn solve_pgd_multistart(
    h: Perturbation,
    mesh: Mesh,
    starts: &[ConePoint],
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let mut best: Option<SolveReport> = None;
    for start in starts {
        let rep = solve_pgd(h, mesh, start, opts)?;
        if best.as_ref().is_none_or(|b| rep.objective < b.objective) {
            best = Some(rep);
        }
    }
    best.ok_or_else(|| Error::InvalidConfig("at least one start is required".into()))
}

/// Sign-pattern iteration driven by the maximum principle.
///
/// Each step evaluates the switching function `w̃` at `u = σ` and flips the
/// cell that violates `σ_i = −sign(w̃_i)` the most (rightmost on ties).
/// Because the `u`-part is concave, every such flip strictly lowers `‖Sσ‖²`;
/// the iteration stops at a pattern obeying the rule on every cell. The sign
/// tests run in exact integer arithmetic on `6n³·G`, so zero switching values
/// are detected exactly and those cells keep their sign. The scale `t` does
/// not affect any sign, so it is set once at the end to `t(σ)`.
pub fn solve_bangbang(
    h: Perturbation,
    mesh: Mesh,
    start_signs: &[i8],
    opts: &SolverOptions,
) -> Result<SolveReport> {
    opts.validate()?;
    validate_signs(&mesh, start_signs)?;
    if h.h() == 0.0 {
        return SolveReport::assemble(h, SolveMethod::Bangbang, ConePoint::apex(mesh), 0, true, opts);
    }

    let n = mesh.n();
    let mut sigma: Vec<i8> = start_signs.to_vec();
    // g = (6n³G)σ
    let mut g: Vec<i64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| scaled_gram_entry(n, i + 1, j + 1) * i64::from(sigma[j]))
                .sum()
        })
        .collect();
    let mut visited = HashSet::new();
    visited.insert(sigma.clone());

    let mut flips = 0;
    let mut fixed_point = false;
    while flips < opts.max_iterations {
        // σ_i·w̃_i in units of 1/(6n³Δ).
        let mut worst: Option<(i64, usize)> = None;
        for i in 0..n {
            let v = i64::from(sigma[i]) * g[i] - scaled_gram_entry(n, i + 1, i + 1);
            if v > 0 && worst.is_none_or(|(b, _)| v >= b) {
                worst = Some((v, i));
            }
        }
        let Some((_, i)) = worst else {
            fixed_point = true;
            break;
        };
        sigma[i] = -sigma[i];
        let delta = 2 * i64::from(sigma[i]);
        for (k, gk) in g.iter_mut().enumerate() {
            *gk += delta * scaled_gram_entry(n, k + 1, i + 1);
        }
        flips += 1;
        if !visited.insert(sigma.clone()) {
            break;
        }
    }

    let scaled: i64 = sigma.iter().zip(&g).map(|(&s, &gi)| i64::from(s) * gi).sum();
    let m = scaled as f64 / (6.0 * (n as f64).powi(3));
    let t = pattern_scale(h, m);
    let minimizer = ConePoint::vertex(t, &sigma, mesh)?;
    SolveReport::assemble(h, SolveMethod::Bangbang, minimizer, flips, fixed_point, opts)
}

/// `+1, −1, +1, ...` of length `n`.
pub fn alternating_signs(n: usize) -> Vec<i8> {
    (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()
}

/// `3n³·‖Sσ‖²`, an integer: the node values of `Sσ` are `Δ·k` for the
/// integer partial sums `k`, and a linear piece from `Δa` to `Δb` has
/// `∫ = Δ³(a² + ab + b²)/3`.
pub fn scaled_norm_s_sq(sigma: &[i8]) -> i64 {
    let mut a: i64 = 0;
    let mut total = 0;
    for &s in sigma {
        let b = a + i64::from(s);
        total += a * a + a * b + b * b;
        a = b;
    }
    total
}

/// `+1` sorts before `−1`.
fn lex_less(a: &[i8], b: &[i8]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return *x > *y;
        }
    }
    false
}

/// Global minimizer by enumerating all `2ⁿ` sign patterns plus the apex.
///
/// Ties (always at least `σ` and `−σ`) resolve to the lexicographically
/// smallest pattern with `+1 < −1`; `tied_optima` reports how many tied.
pub fn solve_bruteforce(h: Perturbation, mesh: Mesh) -> Result<SolveReport> {
    solve_bruteforce_with(h, mesh, &SolverOptions::default())
}

pub fn solve_bruteforce_with(h: Perturbation, mesh: Mesh, opts: &SolverOptions) -> Result<SolveReport> {
    let n = mesh.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLargeForBruteForce {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let lambda = op_norm_sstar_s(mesh)?;
    if 2.0 * lambda >= 1.0 {
        return Err(Error::ConcavityViolated(2.0 * lambda));
    }

    let mut best: Option<(i64, Vec<i8>)> = None;
    let mut ties = 0;
    let mut count = 0;
    for sigma in vertex_patterns(n) {
        count += 1;
        let q = scaled_norm_s_sq(&sigma);
        match &best {
            Some((bq, bs)) if q > *bq || (q == *bq && !lex_less(&sigma, bs)) => {
                if q == *bq {
                    ties += 1;
                }
            }
            Some((bq, _)) => {
                ties = if q == *bq { ties + 1 } else { 1 };
                best = Some((q, sigma));
            }
            None => {
                ties = 1;
                best = Some((q, sigma));
            }
        }
    }
    let (q, sigma) = best.expect("n >= 1 gives at least two patterns");
    let m = q as f64 / (3.0 * (n as f64).powi(3));

    // The apex has objective 0; a pattern wins only when strictly below.
    let minimizer = if pattern_objective(h, m) < 0.0 {
        ConePoint::vertex(pattern_scale(h, m), &sigma, mesh)?
    } else {
        ConePoint::apex(mesh)
    };
    let mut report = SolveReport::assemble(h, SolveMethod::Brute, minimizer, count, true, opts)?;
    report.tied_optima = ties;
    Ok(report)
}
