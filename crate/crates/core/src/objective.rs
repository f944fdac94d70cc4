//! The perturbed functional
//! `f_h(t, u) = t² + ‖Su‖² − ½‖u‖² − h·t`.
//!
//! Gradients are X-metric Riesz representatives, so `⟨∇f, d⟩_X` is the
//! directional derivative.

use crate::cone::ConePoint;
use crate::error::{Error, Result};
use crate::grid::l2_norm_sq;
use crate::operators::{apply_sstar_s, norm_s_sq};

/// Magnitude `h ≥ 0` of the linear perturbation `−h·t`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Perturbation(f64);

impl Perturbation {
    pub fn new(h: f64) -> Result<Self> {
        if !h.is_finite() || h < 0.0 {
            return Err(Error::NegativePerturbation(h));
        }
        Ok(Perturbation(h))
    }

    pub const fn unperturbed() -> Self {
        Perturbation(0.0)
    }

    #[inline]
    pub fn h(self) -> f64 {
        self.0
    }
}

pub fn value(h: Perturbation, p: &ConePoint) -> f64 {
    p.t * p.t + norm_s_sq(&p.u) - 0.5 * l2_norm_sq(&p.u) - h.0 * p.t
}

/// `(2t − h, 2·S*Su − u)`.
pub fn gradient(h: Perturbation, p: &ConePoint) -> ConePoint {
    let mut g = hessian_vec(p);
    g.t -= h.0;
    g
}

/// `2t² + 2‖Su‖² − ‖u‖²`; constant in the base point and independent of `h`.
pub fn hessian_form(d: &ConePoint) -> f64 {
    2.0 * d.t * d.t + 2.0 * norm_s_sq(&d.u) - l2_norm_sq(&d.u)
}

/// `(2t, 2·S*Su − u)`.
pub fn hessian_vec(d: &ConePoint) -> ConePoint {
    let w = apply_sstar_s(&d.u);
    let u = d.u.scale(-1.0).axpy(2.0, &w).expect("same mesh");
    ConePoint::new(2.0 * d.t, u)
}

/// `hessian_form(d) / ‖d‖²_X`.
pub fn rayleigh_ratio(d: &ConePoint) -> Result<f64> {
    let denom = d.norm_x_sq();
    if denom == 0.0 {
        return Err(Error::ZeroDirection);
    }
    Ok(hessian_form(d) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::inner_x;
    use crate::grid::{GridFunction, Mesh};

    fn point(t: f64, u: &[f64]) -> ConePoint {
        let mesh = Mesh::new(u.len()).unwrap();
        ConePoint::new(t, GridFunction::new(mesh, u.to_vec()).unwrap())
    }

    fn ph(h: f64) -> Perturbation {
        Perturbation::new(h).unwrap()
    }

    #[test]
    fn perturbation_must_be_nonnegative() {
        assert!(Perturbation::new(-0.1).is_err());
        assert!(Perturbation::new(f64::NAN).is_err());
        assert_eq!(Perturbation::new(0.0).unwrap(), Perturbation::unperturbed());
    }

    #[test]
    fn value_examples() {
        assert_eq!(value(ph(0.0), &point(0.0, &[0.0, 0.0])), 0.0);
        assert!((value(ph(0.0), &point(1.0, &[1.0, 1.0])) - 5.0 / 6.0).abs() < 1e-15);
        let t = 6.0 / 7.0;
        assert!((value(ph(1.0), &point(t, &[t, -t])) + 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let g = gradient(ph(0.0), &point(0.0, &[0.0, 0.0]));
        assert_eq!(g.t, 0.0);
        assert!(g.u.values().iter().all(|&v| v == 0.0));

        let g = gradient(ph(0.3), &point(0.0, &[0.0, 0.0, 0.0]));
        assert_eq!(g.t, -0.3);

        for h in [0.0, 0.4, 2.0] {
            let g = gradient(ph(h), &point(1.0, &[1.0]));
            assert!((g.t - (2.0 - h)).abs() < 1e-15);
            assert!((g.u.values()[0] + 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hessian_examples() {
        assert_eq!(hessian_form(&point(0.0, &[0.0])), 0.0);
        assert!((hessian_form(&point(1.0, &[1.0, 1.0])) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(hessian_form(&point(1.0, &[0.0, 0.0])), 2.0);

        let hv = hessian_vec(&point(1.0, &[0.0]));
        assert_eq!((hv.t, hv.u.values()[0]), (2.0, 0.0));
        let hv = hessian_vec(&point(0.0, &[1.0]));
        assert_eq!(hv.t, 0.0);
        assert!((hv.u.values()[0] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hessian_vec_polarizes_form() {
        let d = point(0.4, &[0.3, -1.2, 0.8, 0.05, -0.6]);
        let lhs = inner_x(&hessian_vec(&d), &d).unwrap();
        assert!((lhs - hessian_form(&d)).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn zero_direction_has_no_ratio() {
        assert!(matches!(
            rayleigh_ratio(&point(0.0, &[0.0])),
            Err(Error::ZeroDirection)
        ));
        assert_eq!(rayleigh_ratio(&point(1.0, &[0.0])).unwrap(), 2.0);
    }
}
