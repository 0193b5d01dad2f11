use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The operation was evaluated where the formula is singular or undefined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violates an operation precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The input state does not lie on the required energy shell.
    #[error("off-shell input: residual {residual:e} exceeds tolerance {tolerance:e}")]
    OffShell { residual: f64, tolerance: f64 },

    /// The adaptive stepper could not meet the requested tolerances.
    #[error("step failure at tau = {tau}: {reason}")]
    StepFailure { tau: f64, reason: String },

    /// The finite-difference grid cannot resolve the requested eigenstates.
    #[error("grid too small: {0}")]
    GridTooSmall(String),
}

pub type Result<T> = core::result::Result<T, Error>;
