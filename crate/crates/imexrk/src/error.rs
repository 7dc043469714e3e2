use thiserror::Error;

/// Errors produced by tableau construction, stability analysis, and the
/// adaptive integrator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown scheme '{name}'; valid schemes: {valid}")]
    UnknownScheme { name: String, valid: String },

    #[error("inconsistent tableau dimensions for '{0}'")]
    BadTableauShape(String),

    #[error("embedded principal error A_hat^(2) is zero; embedding has the same order as the primary method")]
    DegenerateEmbedding,

    #[error("matrix is singular (pivot {pivot:.3e} at row {row})")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("no A-stable embedding found among {starts} starts")]
    InfeasibleEmbedding { starts: usize },

    #[error("error mask is empty")]
    EmptyErrorMask,

    #[error("stage solve failed: {0}")]
    StageSolve(String),

    #[error("non-finite state encountered at t = {t:.6e}")]
    NonFiniteState { t: f64 },

    #[error("step rejected {rejects} times at t = {t:.6e} (last err = {err:.3e})")]
    TooManyRejects { t: f64, rejects: u32, err: f64 },

    #[error("step size underflow at t = {t:.6e}: dt = {dt:.3e} < dt_min = {dt_min:.3e} (err = {err:.3e})")]
    DtUnderflow { t: f64, dt: f64, dt_min: f64, err: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
