//! The Volterra integration operator `(Su)(x) = ∫₀ˣ u` on piecewise-constant
//! functions, its adjoint composition `S*S`, the Gram matrix of `‖Su‖²` and
//! a power-iteration estimate of `‖S*S‖`.
//!
//! For piecewise-constant `u`, `Su` is continuous and piecewise linear and
//! `x ↦ ∫ₓ¹ (Su)` is piecewise quadratic, so everything here is computed in
//! closed form.

use crate::error::{Error, Result};
use crate::grid::{dot, GridFunction, Mesh};

/// Continuous piecewise-linear function given by its values at the nodes
/// `x_k = k/n`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFunction {
    mesh: Mesh,
    node_values: Vec<f64>,
}

impl PiecewiseLinearFunction {
    pub fn new(mesh: Mesh, node_values: Vec<f64>) -> Result<Self> {
        if node_values.len() != mesh.n() + 1 {
            return Err(Error::LengthMismatch {
                expected: mesh.n() + 1,
                got: node_values.len(),
            });
        }
        Ok(PiecewiseLinearFunction { mesh, node_values })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// Exact ∫₀¹ of the square.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.mesh.width();
        self.node_values
            .windows(2)
            .map(|ab| ab[0] * ab[0] + ab[0] * ab[1] + ab[1] * ab[1])
            .sum::<f64>()
            * w
            / 3.0
    }
}

/// Exact ∫₀¹ p·q for two piecewise-linear functions on the same mesh.
pub fn l2_inner_pl(p: &PiecewiseLinearFunction, q: &PiecewiseLinearFunction) -> Result<f64> {
    p.mesh.ensure_same(&q.mesh)?;
    let w = p.mesh.width();
    let s: f64 = p
        .node_values
        .windows(2)
        .zip(q.node_values.windows(2))
        .map(|(a, b)| 2.0 * a[0] * b[0] + a[0] * b[1] + a[1] * b[0] + 2.0 * a[1] * b[1])
        .sum();
    Ok(s * w / 6.0)
}

/// `Su` as node values: `(Su)(x_k) = Δ·Σ_{i≤k} u_i`.
pub fn apply_s(u: &GridFunction) -> PiecewiseLinearFunction {
    let mesh = *u.mesh();
    let w = mesh.width();
    let mut node_values = Vec::with_capacity(mesh.n() + 1);
    let mut acc = 0.0;
    node_values.push(0.0);
    for &ui in u.values() {
        acc += w * ui;
        node_values.push(acc);
    }
    PiecewiseLinearFunction { mesh, node_values }
}

/// ‖Su‖²_{L²(0,1)}, integrated exactly cell by cell.
pub fn norm_s_sq(u: &GridFunction) -> f64 {
    apply_s(u).l2_norm_sq()
}

/// Cell averages of `x ↦ ∫ₓ¹ (Su)(ξ) dξ`.
///
/// Equal to `(G u)_i / Δ` for the Gram matrix `G`, computed in O(n) with a
/// backward sweep. On cell `i` with `Su` running linearly from `a` to `b`,
/// the average is `Q(x_i) + Δ(a/6 + b/3)` where `Q(x_i) = ∫_{x_i}^1 Su`.
pub fn apply_sstar_s(u: &GridFunction) -> GridFunction {
    let su = apply_s(u);
    let s = su.node_values();
    let mesh = *u.mesh();
    let w = mesh.width();
    let n = mesh.n();
    let mut out = vec![0.0; n];
    let mut tail = 0.0;
    for i in (0..n).rev() {
        let (a, b) = (s[i], s[i + 1]);
        out[i] = tail + w * (a / 6.0 + b / 3.0);
        tail += w * 0.5 * (a + b);
    }
    GridFunction::new(mesh, out).expect("length matches mesh")
}

/// Gram matrix of `‖Su‖²` in the cell-indicator basis.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    mesh: Mesh,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Entry `(i, j)`, zero-based.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.mesh.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.mesh.n();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn matvec(&self, u: &GridFunction) -> Result<Vec<f64>> {
        self.mesh.ensure_same(u.mesh())?;
        Ok((0..self.mesh.n())
            .map(|i| dot(self.row(i), u.values()))
            .collect())
    }

    /// uᵀ G u.
    pub fn quadratic_form(&self, u: &GridFunction) -> Result<f64> {
        Ok(dot(&self.matvec(u)?, u.values()))
    }
}

/// Closed-form Gram entry, one-based indices.
///
/// `G_ii = Δ³/3 + Δ²(1 − iΔ)`, `G_ij = Δ²(Δ/2 + 1 − max(i,j)Δ)` for `i ≠ j`.
pub fn gram_entry(mesh: &Mesh, i: usize, j: usize) -> f64 {
    let d = mesh.width();
    if i == j {
        d * d * d / 3.0 + d * d * (1.0 - i as f64 * d)
    } else {
        let k = i.max(j);
        d * d * (d / 2.0 + 1.0 - k as f64 * d)
    }
}

/// The Gram entry scaled by `6n³`, which is always an integer:
/// `2 + 6(n − i)` on the diagonal and `3 + 6(n − max(i,j))` off it.
#[inline]
pub fn scaled_gram_entry(n: usize, i: usize, j: usize) -> i64 {
    let n = n as i64;
    if i == j {
        2 + 6 * (n - i as i64)
    } else {
        3 + 6 * (n - i.max(j) as i64)
    }
}

pub fn gram_matrix(mesh: Mesh) -> GramMatrix {
    let n = mesh.n();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = gram_entry(&mesh, i + 1, j + 1);
        }
    }
    GramMatrix { mesh, entries }
}

/// Largest eigenvalue of `S*S` restricted to piecewise constants on `mesh`.
///
/// Power iteration in the weighted inner product, started from the constant
/// function; stops once the Rayleigh quotient moves by less than `1e-12`.
pub fn op_norm_sstar_s(mesh: Mesh) -> Result<f64> {
    const MAX_ITER: usize = 10_000;
    const TOL: f64 = 1e-12;

    let mut u = GridFunction::constant(mesh, 1.0);
    let mut lambda = 0.0;
    for _ in 0..MAX_ITER {
        let au = apply_sstar_s(&u);
        let next = dot(au.values(), u.values()) / dot(u.values(), u.values());
        let norm = dot(au.values(), au.values()).sqrt();
        u = au.scale(1.0 / norm);
        if (next - lambda).abs() < TOL {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::PowerIteration {
        iterations: MAX_ITER,
        last: lambda,
    })
}
