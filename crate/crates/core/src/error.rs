use thiserror::Error;

/// Errors raised by the simulator and the analytic modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value is out of its admissible range.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// An argument falls outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The explicit solver produced a state that violates an invariant.
    #[error("numerical fault: {0}")]
    Numerical(String),

    /// No trapping orbit exists for the given parameters.
    #[error("untrappable: {0}")]
    Untrappable(String),

    /// Not enough data to reach a verdict.
    #[error("indeterminate: {0}")]
    Indeterminate(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

impl Error {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
