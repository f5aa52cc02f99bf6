//! Command errors and their process exit codes.

use std::fmt::Display;

use thiserror::Error;

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for bad arguments, configs or inputs that fail validation.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for unreadable, unwritable or malformed files.
pub const EXIT_IO: i32 = 3;
/// Exit code for a failed internal numerical check.
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// Prefixes the message, keeping the exit class.
    pub fn context(self, what: impl Display) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
        }
    }
}

impl From<freqtc::Error> for CliError {
    fn from(e: freqtc::Error) -> Self {
        use freqtc::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidInput(_) | E::DimensionMismatch(_) | E::InvalidState(_) | E::NonFinite(_) | E::Config(_) => {
                CliError::Usage(message)
            }
            E::Format { .. } | E::Io(_) | E::Image(_) => CliError::Io(message),
            E::Numerical(_) => CliError::Numerical(message),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Adds a context prefix to any error convertible to [`CliError`].
pub trait Context<T> {
    fn context(self, what: impl Display) -> Result<T>;
}

impl<T, E: Into<CliError>> Context<T> for std::result::Result<T, E> {
    fn context(self, what: impl Display) -> Result<T> {
        self.map_err(|e| e.into().context(what))
    }
}
