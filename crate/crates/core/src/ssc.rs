//! Second-order sufficient conditions at the apex: stationarity, the
//! coercivity chain `f''(0)d² ≥ t²/3 ≥ ‖d‖²/6` on `C`, and sampled
//! estimates of the coercivity and quadratic-growth constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{contains, stationarity_residual, ConePoint, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::grid::{l2_norm_sq, GridFunction, Mesh};
use crate::objective::{gradient, hessian_form, rayleigh_ratio, value, Perturbation};
use crate::operators::norm_s_sq;

/// Analytic lower bound on the coercivity constant over `C`.
pub const BETA_BOUND: f64 = 1.0 / 6.0;

/// Provable lower bound on the growth constant `δ` at the apex.
pub const DELTA_BOUND: f64 = 0.5;

/// Meshes up to this size get every vertex pattern `u = ±t` enumerated.
pub const VERTEX_ENUMERATION_MAX_N: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Nonnegative when the inequality holds.
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    pub beta_estimate: f64,
    pub beta_bound: f64,
    pub samples: usize,
    pub worst_direction: ConePoint,
    pub chain_checks_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub delta_estimate: f64,
    pub epsilon: f64,
    pub samples: usize,
    pub worst_point: ConePoint,
}

/// Projected-gradient residual of `f_h` at a feasible `p`.
pub fn check_stationarity(h: Perturbation, p: &ConePoint) -> Result<f64> {
    stationarity_residual(p, &gradient(h, p))
}

/// Evaluates each link of the coercivity chain for a nonzero `d ∈ C`:
///
/// 1. `‖Su‖² ≤ t²/3`
/// 2. `‖u‖² ≤ t²`
/// 3. `f''d² ≥ t²/3`
/// 4. `f''d² ≥ ‖d‖²_X / 6`
///
/// A link passes when its slack is at least `−tol·max(1, ‖d‖²_X)`.
pub fn coercivity_certificate(d: &ConePoint, tol: f64) -> Result<Vec<ChainLink>> {
    if !contains(d, FEASIBILITY_TOL) {
        return Err(Error::Infeasible {
            t: d.t,
            max_abs: d.u.sup_norm(),
        });
    }
    let norm_sq = d.norm_x_sq();
    if norm_sq == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let t_sq = d.t * d.t;
    let su = norm_s_sq(&d.u);
    let uu = l2_norm_sq(&d.u);
    let hess = hessian_form(d);
    let floor = -tol * norm_sq.max(1.0);

    let link = |name, lhs: f64, rhs: f64, slack: f64| ChainLink {
        name,
        lhs,
        rhs,
        slack,
        passed: slack >= floor,
    };
    Ok(vec![
        link("norm_su_sq_le_t_sq_over_3", su, t_sq / 3.0, t_sq / 3.0 - su),
        link("norm_u_sq_le_t_sq", uu, t_sq, t_sq - uu),
        link("hessian_ge_t_sq_over_3", hess, t_sq / 3.0, hess - t_sq / 3.0),
        link("hessian_ge_norm_sq_over_6", hess, norm_sq / 6.0, hess - norm_sq / 6.0),
    ])
}

/// Random cone direction with `t = 1` and `u_i ~ U[−1, 1]`.
pub fn random_direction(mesh: Mesh, rng: &mut impl Rng) -> ConePoint {
    let u = GridFunction::from_fn(mesh, |_| rng.gen_range(-1.0..=1.0));
    ConePoint::new(1.0, u)
}

/// All sign patterns `σ ∈ {±1}ⁿ`, in binary counting order with bit `i`
/// of the counter selecting `−1` at cell `i`.
pub(crate) fn vertex_patterns(n: usize) -> impl Iterator<Item = Vec<i8>> {
    (0u64..(1u64 << n)).map(move |bits| {
        (0..n)
            .map(|i| if bits >> i & 1 == 1 { -1 } else { 1 })
            .collect()
    })
}

/// The deterministic direction set shared by the coercivity and growth
/// estimators: `(1, 0)`, the alternating vertex, every vertex for small
/// meshes, then `samples` random directions.
fn structured_directions(mesh: Mesh) -> Vec<ConePoint> {
    let mut dirs = vec![
        ConePoint::new(1.0, GridFunction::zeros(mesh)),
        ConePoint::new(1.0, GridFunction::alternating(mesh)),
    ];
    if mesh.n() <= VERTEX_ENUMERATION_MAX_N {
        for sigma in vertex_patterns(mesh.n()) {
            dirs.push(ConePoint::vertex(1.0, &sigma, mesh).expect("pattern length matches"));
        }
    }
    dirs
}

pub fn coercivity_estimate(mesh: Mesh, samples: usize, seed: u64) -> Result<CoercivityReport> {
    coercivity_estimate_with_tol(mesh, samples, seed, 1e-10)
}

pub fn coercivity_estimate_with_tol(
    mesh: Mesh,
    samples: usize,
    seed: u64,
    chain_tol: f64,
) -> Result<CoercivityReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let structured = structured_directions(mesh);
    let random = (0..samples).map(|_| random_direction(mesh, &mut rng));

    let mut best: Option<(f64, ConePoint)> = None;
    let mut chain_ok = true;
    let mut count = 0;
    for d in structured.into_iter().chain(random) {
        count += 1;
        let ratio = rayleigh_ratio(&d)?;
        chain_ok &= coercivity_certificate(&d, chain_tol)?
            .iter()
            .all(|l| l.passed);
        if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
            best = Some((ratio, d));
        }
    }
    let (beta_estimate, worst_direction) = best.expect("at least one direction");
    Ok(CoercivityReport {
        beta_estimate,
        beta_bound: BETA_BOUND,
        samples: count,
        worst_direction,
        chain_checks_passed: chain_ok,
    })
}

/// `δ̂ = min 2·f₀(x)/‖x‖²_X` over sampled `x ∈ C` with `‖x‖_X ≤ epsilon`.
///
/// `f₀` is quadratic and `C` is a cone, so the ratio does not depend on the
/// radius; `epsilon` only sets where the samples live.
pub fn growth_estimate(mesh: Mesh, epsilon: f64, samples: usize, seed: u64) -> Result<GrowthReport> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = Perturbation::unperturbed();

    let structured = structured_directions(mesh);
    let mut points = Vec::with_capacity(structured.len() + samples);
    for d in structured {
        let r: f64 = rng.gen_range(f64::EPSILON..=1.0);
        points.push(d.scale(epsilon * r / d.norm_x()));
    }
    for _ in 0..samples {
        let d = random_direction(mesh, &mut rng);
        let r: f64 = rng.gen_range(f64::EPSILON..=1.0);
        points.push(d.scale(epsilon * r / d.norm_x()));
    }

    let mut best: Option<(f64, ConePoint)> = None;
    let count = points.len();
    for x in points {
        let ratio = 2.0 * value(h0, &x) / x.norm_x_sq();
        if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
            best = Some((ratio, x));
        }
    }
    let (delta_estimate, worst_point) = best.expect("at least one point");
    Ok(GrowthReport {
        delta_estimate,
        epsilon,
        samples: count,
        worst_point,
    })
}
