use std::fmt;

use eitline_core::Error;

/// Exit codes of the `eitline` binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOLUTION: i32 = 3;

/// A command failure, printed as `error[tag]: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub tag: String,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn usage(tag: &str, message: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self {
            tag: "check-failed".into(),
            message: message.into(),
            code: EXIT_FAILED_CHECK,
        }
    }

    /// A core error raised while checking the configuration.
    pub fn config(e: Error) -> Self {
        let mut err = Self::from(e);
        err.code = EXIT_USAGE;
        err
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::SingularRate(_) | Error::OpticallyThin(_) => EXIT_USAGE,
            Error::UnresolvedWidth(_) | Error::Multimodal(_) | Error::FitFailed { .. } | Error::Resolution { .. } => {
                EXIT_RESOLUTION
            }
        };
        let message = e.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        Self {
            tag: e.kind().into(),
            message,
            code,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage("io", e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.tag, self.message)
    }
}

impl std::error::Error for CliError {}
