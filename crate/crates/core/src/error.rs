use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge: error estimate {error_estimate:e} after {subdivisions} subdivisions")]
    NonConvergence { error_estimate: f64, subdivisions: usize },

    #[error("invalid integration interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),

    #[error("derivative order {0} is not supported")]
    UnsupportedOrder(usize),

    #[error("parameter out of domain: {0}")]
    ParameterOutOfDomain(String),

    #[error("weak characteristic function too close to zero (|cf| = {modulus:e}) at t = {t}")]
    ZeroCrossing { t: f64, modulus: f64 },

    #[error("grid spacing too coarse for branch tracking at t = {t}")]
    BranchJump { t: f64 },

    #[error("pair has zero normalisation <T, phi> = {0:e}")]
    ZeroNormalisation(f64),

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("operation requires a Gaussian kernel")]
    KernelNotGaussian,

    #[error("matrix is not symmetric positive definite")]
    NotSpd,

    #[error("operation requires a strictly positive kernel")]
    KernelNotPositive,

    #[error("second weak cumulant must be positive, got {0:e}")]
    NonPositiveVariance(f64),

    #[error("distribution is not a density: {0}")]
    NotADensity(String),

    #[error("rejection envelope search failed: {0}")]
    EnvelopeSearchFailed(String),

    #[error("regularisation parameter must be positive, got {0:e}")]
    NonPositiveLambda(f64),

    #[error("sample is empty")]
    EmptySample,

    #[error("empirical weak moment {value} outside attainable range [{lower}, {upper}]")]
    OutOfRange { value: f64, lower: f64, upper: f64 },

    #[error("root is not bracketed on [{lower}, {upper}]")]
    NoBracket { lower: f64, upper: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
