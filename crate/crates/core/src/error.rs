use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kappa = {0} is not positive; the spectral path needs kappa > 0")]
    KappaNonPositive(f64),

    #[error("state has zero mass; mean momentum and position are undefined")]
    ZeroMass,

    #[error("symmetric eigen-decomposition of order {0} did not converge")]
    EigenNoConvergence(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("H' closed form needs {0}")]
    PrimeCondition(&'static str),

    #[error("mode index must be even, got {0}")]
    OddMode(usize),

    #[error("stability hypothesis violated: {0}")]
    Hypothesis(&'static str),

    #[error(
        "time-step refinement changed the state by {achieved:.3e} (> {tolerance:.3e}); \
         retry with dt <= {required_dt:.3e}"
    )]
    ToleranceNotMet {
        achieved: f64,
        tolerance: f64,
        required_dt: f64,
    },

    #[error("frequency map is not monotone near M = {0}")]
    NonMonotone(f64),

    #[error("closed-form phase disagrees with quadrature by {0:.3e}")]
    PhaseCalibration(f64),
}
