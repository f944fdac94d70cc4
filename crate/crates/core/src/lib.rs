//! Numerical laboratory for a cone-constrained quadratic problem on
//! `ℝ × L²(0,1)` whose minimizer at the origin satisfies the second-order
//! sufficient condition, yet whose linearly perturbed versions have no
//! minimizers in the continuum.
//!
//! At a fixed mesh every perturbed problem does have minimizers; they are
//! bang-bang controls oscillating at the mesh frequency, and refining the
//! mesh drives them toward a weak limit that is not a minimizer. The
//! modules mirror that story:
//!
//! * [`grid`], [`operators`]: piecewise-constant `L²(0,1)` and the Volterra
//!   operator `S`, all integrals exact;
//! * [`cone`], [`objective`]: the feasible cone and `f_h`;
//! * [`ssc`]: second-order conditions and growth at the apex;
//! * [`solvers`]: projected gradient, bang-bang iteration, enumeration;
//! * [`experiments`]: refinement sweeps, stability audit, CSV/JSON output;
//! * [`cli`]: the `ssc-lab` command line.

pub mod cli;
pub mod cone;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod objective;
pub mod operators;
pub mod solvers;
pub mod ssc;

pub use cone::ConePoint;
pub use error::{Error, Result};
pub use grid::{GridFunction, Mesh};
pub use objective::Perturbation;
pub use solvers::{SolveMethod, SolveReport, SolverOptions};
