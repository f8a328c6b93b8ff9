//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid court configuration (chair count, reference chair, labels).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A sample unit or scenario violates a structural invariant.
    #[error("invalid sample unit: {0}")]
    Sample(String),

    /// A chair marked unavailable was used where an available chair is required.
    #[error("chair {chair} is unavailable in this unit")]
    UnavailableChair { chair: usize },

    /// Every chair of a unit is unavailable; probabilities are undefined.
    #[error("no chair is available in this unit")]
    NoAvailableChair,

    /// A parameter vector does not match the model layout.
    #[error("parameter vector has length {got}, model requires {expected}")]
    ParameterLength { expected: usize, got: usize },

    /// A coefficient cell has no exposure in the sample and cannot be estimated.
    #[error("inestimable coefficient cell(s): {0}")]
    Inestimable(String),

    /// The observed information matrix is singular; the fit is not identifiable.
    #[error("observed information matrix is singular: {0}")]
    SingularInformation(String),

    /// No finite-likelihood step could be found during line search.
    #[error("line search failed: no finite-likelihood step exists")]
    NoFiniteStep,

    /// An operation that requires a converged fit received a non-converged one.
    #[error("fit did not converge: {0}")]
    NotConverged(String),

    /// Likelihood-ratio inputs are inconsistent (non-nested or mismatched fits).
    #[error("invalid likelihood-ratio test: {0}")]
    InvalidLrt(String),

    /// Numeric argument outside the supported domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Data file failed to parse; the location carries a 1-based line number.
    #[error("{path}:{line}: {message}")]
    ParseRow {
        path: String,
        line: usize,
        message: String,
    },

    /// Data-level inconsistency (e.g. assignments to unavailable chairs).
    #[error("invalid data: {0}")]
    Data(String),

    /// Invalid generator specification for the simulator.
    #[error("invalid generator: {0}")]
    Generator(String),

    /// The brute-force oracle left its supported domain.
    #[error("oracle overflow: {0}")]
    OracleOverflow(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
