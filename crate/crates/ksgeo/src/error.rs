use std::fmt;

use ksgeo_core::Error as CoreError;

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    BadInput = 2,
    NumericalFailure = 3,
    IdentityFailure = 4,
    AcceptanceFailure = 5,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A failed command: the exit status plus a message for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Self {
            exit,
            message: message.into(),
        }
    }

    pub fn bad_input(message: impl Into<String>) -> Self {
        Self::new(Exit::BadInput, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let exit = match err {
            CoreError::StepFailure { .. } | CoreError::GridTooSmall(_) => Exit::NumericalFailure,
            CoreError::InvalidParameter(_)
            | CoreError::Domain(_)
            | CoreError::Precondition(_)
            | CoreError::OffShell { .. } => Exit::BadInput,
        };
        Self::new(exit, err.to_string())
    }
}

impl From<crate::formats::FormatError> for CliError {
    fn from(err: crate::formats::FormatError) -> Self {
        Self::bad_input(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
