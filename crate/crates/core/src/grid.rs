//! Piecewise-constant discretization of L²(0,1) on a uniform mesh.
//!
//! Cell `i` (zero-based here, one-based in formulas) covers
//! `[i·Δ, (i+1)·Δ]` with `Δ = 1/n`. Inner products are exact.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Uniform partition of (0,1) into `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    n: usize,
    width: f64,
}

impl Mesh {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        Ok(Mesh {
            n,
            width: 1.0 / n as f64,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell width Δ = 1/n.
    #[inline]
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Node coordinates x_k = k/n, k = 0..=n.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|k| k as f64 / self.n as f64).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Mesh) -> Result<()> {
        if self.n != other.n {
            return Err(Error::MeshMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// A piecewise-constant function, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Mesh,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n() {
            return Err(Error::LengthMismatch {
                expected: mesh.n(),
                got: values.len(),
            });
        }
        Ok(GridFunction { mesh, values })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        GridFunction {
            mesh,
            values: vec![0.0; mesh.n()],
        }
    }

    pub fn constant(mesh: Mesh, c: f64) -> Self {
        GridFunction {
            mesh,
            values: vec![c; mesh.n()],
        }
    }

    /// `+1, -1, +1, ...` starting with `+1` on the leftmost cell.
    pub fn alternating(mesh: Mesh) -> Self {
        let values = (0..mesh.n())
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        GridFunction { mesh, values }
    }

    pub fn from_fn(mesh: Mesh, f: impl FnMut(usize) -> f64) -> Self {
        GridFunction {
            mesh,
            values: (0..mesh.n()).map(f).collect(),
        }
    }

    #[inline]
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            mesh: self.mesh,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<Self> {
        self.mesh.ensure_same(&other.mesh)?;
        Ok(GridFunction {
            mesh: self.mesh,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    /// max_i |u_i|.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exact replication onto the mesh with `factor` times as many cells.
    pub fn refine(&self, factor: usize) -> Result<Self> {
        let mesh = Mesh::new(self.mesh.n() * factor)?;
        let values = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, factor))
            .collect();
        Ok(GridFunction { mesh, values })
    }

    /// Number of indices with `u_i · u_{i+1} < 0`.
    pub fn sign_changes(&self) -> usize {
        self.values
            .windows(2)
            .filter(|w| w[0] * w[1] < 0.0)
            .count()
    }
}

impl Serialize for GridFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}

/// Exact L² inner product: Δ·Σ u_i v_i.
pub fn l2_inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.mesh.ensure_same(&v.mesh)?;
    Ok(u.mesh.width * dot(&u.values, &v.values))
}

/// Exact squared L² norm: Δ·Σ u_i².
pub fn l2_norm_sq(u: &GridFunction) -> f64 {
    u.mesh.width * dot(&u.values, &u.values)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.scale(-1.0)
    }
}

impl Mul<&GridFunction> for f64 {
    type Output = GridFunction;
    fn mul(self, rhs: &GridFunction) -> GridFunction {
        rhs.scale(self)
    }
}

// The binary operators panic on mismatched meshes; use `axpy` for a checked variant.
impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(1.0, rhs).expect("mesh mismatch in GridFunction addition")
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.axpy(-1.0, rhs).expect("mesh mismatch in GridFunction subtraction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(values: &[f64]) -> GridFunction {
        GridFunction::new(Mesh::new(values.len()).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn mesh_rejects_zero_cells() {
        assert!(matches!(Mesh::new(0), Err(Error::EmptyMesh)));
        let m = Mesh::new(7).unwrap();
        assert!((m.width() * m.n() as f64 - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn length_must_match_mesh() {
        let mesh = Mesh::new(3).unwrap();
        assert!(matches!(
            GridFunction::new(mesh, vec![1.0, 2.0]),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(l2_inner(&gf(&[1.0, 1.0]), &gf(&[1.0, -1.0])).unwrap(), 0.0);
        assert_eq!(l2_inner(&gf(&[1.0, 1.0]), &gf(&[1.0, 1.0])).unwrap(), 1.0);
        let v = l2_inner(&gf(&[1.0, 2.0, 3.0, 4.0]), &gf(&[1.0; 4])).unwrap();
        assert_eq!(v, 2.5);
    }

    #[test]
    fn inner_product_rejects_mesh_mismatch() {
        let err = l2_inner(&gf(&[1.0, 1.0]), &gf(&[1.0, 1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::MeshMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(l2_norm_sq(&GridFunction::zeros(Mesh::new(5).unwrap())), 0.0);
        assert_eq!(l2_norm_sq(&gf(&[1.0, -1.0])), 1.0);
        assert_eq!(l2_norm_sq(&gf(&[3.0, 0.0, 0.0])), 3.0);
    }

    #[test]
    fn sign_changes_counts_strict_flips() {
        assert_eq!(gf(&[1.0, -1.0, 1.0, -1.0]).sign_changes(), 3);
        assert_eq!(gf(&[1.0, 0.0, -1.0]).sign_changes(), 0);
        assert_eq!(GridFunction::alternating(Mesh::new(9).unwrap()).sign_changes(), 8);
    }
}
