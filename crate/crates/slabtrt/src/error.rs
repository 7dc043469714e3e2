use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("temperature {t} eV is not positive")]
    NonPositiveTemperature { t: f64 },

    #[error("invalid mesh: {0}")]
    BadMesh(String),

    #[error("invalid group structure: {0}")]
    BadGroups(String),

    #[error("vanishing collapse denominator in cell {cell} ({which})")]
    VanishingDenominator { cell: usize, which: &'static str },

    #[error("low-order Newton solve diverged after {iters} iterations (residual {residual:.3e})")]
    NewtonDiverged { iters: u32, residual: f64 },

    #[error("HOLO outer iteration did not reach tolerance {tol:.1e} in {iters} iterations (last consistency residual {residual:.3e})")]
    HoloNonConvergence { iters: u32, tol: f64, residual: f64 },

    #[error("invalid problem: {0}")]
    BadProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<Error> for imexrk::Error {
    fn from(e: Error) -> Self {
        imexrk::Error::StageSolve(e.to_string())
    }
}
