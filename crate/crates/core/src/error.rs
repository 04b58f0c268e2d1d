use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("label {label} out of range for subsystem {subsystem} (dimension {dim})")]
    LabelOutOfRange {
        subsystem: usize,
        label: usize,
        dim: usize,
    },

    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("subsystem index {0} out of range")]
    SubsystemOutOfRange(usize),

    #[error("subsystem {0} is the cavity, expected a qutrit")]
    NotAQutrit(usize),

    #[error("Hilbert space mismatch")]
    SpaceMismatch,

    #[error("space is missing subsystem {0}")]
    MissingSubsystem(String),

    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("state norm is zero")]
    ZeroNorm,

    #[error("norm drift {0:e} exceeds tolerance")]
    NormDrift(f64),

    #[error("integrator step size underflow at t = {0:e}")]
    StepUnderflow(f64),

    #[error("|f> population {0:e} on a dispersively coupled qutrit")]
    FLevelPopulated(f64),

    #[error("commensurability violated: (2m+1)/lambda = {lhs:e}, (2k+1)/lambda' = {rhs:e}")]
    Commensurability { lhs: f64, rhs: f64 },

    #[error("dephasing model: {0}")]
    Dephasing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
