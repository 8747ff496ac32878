use thiserror::Error;

use crate::spectral::FitResult;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// Each variant has a stable kebab-case tag (see [`Error::kind`]) that the
/// command-line front end prints verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unresolved width: {0}")]
    UnresolvedWidth(String),

    #[error("multimodal spectrum: {0}")]
    Multimodal(String),

    #[error("fit did not converge after {iterations} iterations (best rms residual {:.3e})", best.rms_residual)]
    FitFailed {
        best: Box<FitResult>,
        iterations: usize,
    },

    #[error("singular rate: {0}")]
    SingularRate(String),

    #[error("optically thin medium: eta*L/Delta_W = {0:.4} <= 1")]
    OpticallyThin(f64),

    #[error("resolution: {what} (achieved residual {residual:.3e})")]
    Resolution { what: String, residual: f64 },
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::UnresolvedWidth(_) => "unresolved-width",
            Error::Multimodal(_) => "multimodal",
            Error::FitFailed { .. } => "fit-failed",
            Error::SingularRate(_) => "singular-rate",
            Error::OpticallyThin(_) => "optically-thin",
            Error::Resolution { .. } => "resolution",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
