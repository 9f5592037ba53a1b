use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The adaptive step fell below the representable minimum; the problem is
    /// too stiff for the explicit pair at the requested tolerance.
    #[error("step size underflow at t = {t} ns (h = {h:e}); system too stiff for requested tolerance")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integrator exceeded {max_steps} steps before reaching t = {t_end} ns")]
    TooManySteps { max_steps: usize, t_end: f64 },

    #[error("non-finite value encountered during integration at t = {t} ns")]
    NonFinite { t: f64 },

    #[error("zero-probability outcome")]
    ZeroProbability,

    #[error("frequency erasure is lossy: norm dropped from {before} to {after}")]
    LossyErasure { before: f64, after: f64 },

    #[error("state still carries distinguishing frequency labels")]
    FrequencyLabelsPresent,

    #[error("state has been frequency-erased; scattering order would be lost")]
    AlreadyErased,

    #[error("state is not normalised (norm {0})")]
    NotNormalized(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
