use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh must have at least one cell")]
    EmptyMesh,
    #[error("grid function has {got} values but the mesh has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("incompatible discretizations: mesh with {left} cells vs mesh with {right} cells")]
    MeshMismatch { left: usize, right: usize },
    #[error("point is not in the cone (t = {t}, max |u_i| = {max_abs})")]
    Infeasible { t: f64, max_abs: f64 },
    #[error("perturbation must be finite and nonnegative, got {0}")]
    NegativePerturbation(f64),
    #[error("zero direction has no Rayleigh ratio")]
    ZeroDirection,
    #[error("power iteration did not converge after {iterations} iterations (last estimate {last})")]
    PowerIteration { iterations: usize, last: f64 },
    #[error("vertex reduction unavailable: 2 * lambda_max(S*S) = {0} is not below 1")]
    ConcavityViolated(f64),
    #[error("exhaustive enumeration supports n <= {max}, got n = {n}; use the bangbang or pgd solver")]
    TooLargeForBruteForce { n: usize, max: usize },
    #[error("sign pattern of length {got} does not match mesh with {expected} cells")]
    SignPatternLength { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
