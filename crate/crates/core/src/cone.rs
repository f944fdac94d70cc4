//! The cone `C = {(t, u) : |u| ≤ t a.e.}` in `X = ℝ × L²(0,1)`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{l2_inner, l2_norm_sq, GridFunction, Mesh};

/// Feasibility slack used by operations that require a point of the cone.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// A point `(t, u)` of `X`. Also used for X-gradients and directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    pub t: f64,
    pub u: GridFunction,
}

impl ConePoint {
    pub fn new(t: f64, u: GridFunction) -> Self {
        ConePoint { t, u }
    }

    /// The apex `(0, 0)`.
    pub fn apex(mesh: Mesh) -> Self {
        ConePoint {
            t: 0.0,
            u: GridFunction::zeros(mesh),
        }
    }

    /// `(t, t·σ)` for a sign pattern `σ`.
    pub fn vertex(t: f64, signs: &[i8], mesh: Mesh) -> Result<Self> {
        let values = signs.iter().map(|&s| t * f64::from(s)).collect();
        Ok(ConePoint {
            t,
            u: GridFunction::new(mesh, values)?,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.u.mesh()
    }

    /// `t² + ‖u‖²`.
    pub fn norm_x_sq(&self) -> f64 {
        self.t * self.t + l2_norm_sq(&self.u)
    }

    pub fn norm_x(&self) -> f64 {
        self.norm_x_sq().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        ConePoint {
            t: c * self.t,
            u: self.u.scale(c),
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &ConePoint) -> Result<Self> {
        Ok(ConePoint {
            t: self.t + c * other.t,
            u: self.u.axpy(c, &other.u)?,
        })
    }

    pub fn negate_u(&self) -> Self {
        ConePoint {
            t: self.t,
            u: -&self.u,
        }
    }
}

impl Serialize for ConePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ConePoint", 2)?;
        s.serialize_field("t", &self.t)?;
        s.serialize_field("u", &self.u)?;
        s.end()
    }
}

/// `⟨p, q⟩_X = p.t·q.t + ⟨p.u, q.u⟩_{L²}`.
pub fn inner_x(p: &ConePoint, q: &ConePoint) -> Result<f64> {
    Ok(p.t * q.t + l2_inner(&p.u, &q.u)?)
}

pub fn distance_x(p: &ConePoint, q: &ConePoint) -> Result<f64> {
    Ok(p.axpy(-1.0, q)?.norm_x())
}

/// `t ≥ −tol` and `|u_i| ≤ t + tol` for every cell.
pub fn contains(p: &ConePoint, tol: f64) -> bool {
    p.t >= -tol && p.u.values().iter().all(|v| v.abs() <= p.t + tol)
}

pub(crate) fn ensure_feasible(p: &ConePoint) -> Result<()> {
    if contains(p, FEASIBILITY_TOL) {
        Ok(())
    } else {
        Err(Error::Infeasible {
            t: p.t,
            max_abs: p.u.sup_norm(),
        })
    }
}

/// Metric projection onto `C` in the X-norm.
///
/// Finds the root `τ*` of `φ(τ) = 2(τ − t) + 2Δ·Σ_{|u_i|>τ} (τ − |u_i|)`,
/// which is continuous and strictly increasing, by scanning the sorted
/// breakpoints `|u_i|`, then clips `u` to `[−τ*, τ*]`.
pub fn project(p: &ConePoint) -> ConePoint {
    let mesh = *p.mesh();
    let d = mesh.width();
    let mut mags: Vec<f64> = p.u.values().iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));

    let total: f64 = mags.iter().sum();
    let tau = if p.t + d * total <= 0.0 {
        0.0
    } else {
        let mut active_sum = 0.0;
        let mut tau = 0.0;
        for k in 0..=mags.len() {
            // k largest magnitudes are clipped on this piece.
            let candidate = (p.t + d * active_sum) / (1.0 + k as f64 * d);
            let lower = mags.get(k).copied().unwrap_or(0.0);
            if candidate >= lower {
                let upper = if k == 0 { f64::INFINITY } else { mags[k - 1] };
                tau = candidate.min(upper).max(lower);
                break;
            }
            active_sum += mags[k];
        }
        tau.max(0.0)
    };

    ConePoint {
        t: tau,
        u: p.u.map(|v| v.clamp(-tau, tau)),
    }
}

/// `‖p − project(p − g)‖_X` for an X-gradient `g` at a feasible `p`.
///
/// Vanishes exactly when `−g` lies in the normal cone of `C` at `p`.
pub fn stationarity_residual(p: &ConePoint, g: &ConePoint) -> Result<f64> {
    ensure_feasible(p)?;
    let trial = p.axpy(-1.0, g)?;
    distance_x(p, &project(&trial))
}
