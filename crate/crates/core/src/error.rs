use thiserror::Error;

/// Errors raised across the simulator and probe suite.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("undefined quantity: {0}")]
    Undefined(String),
    #[error("empty mode set: {0}")]
    EmptyModeSet(String),
    #[error("summation budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("degenerate regression: {0}")]
    Regression(String),
    #[error("checkpoint format: {0}")]
    Checkpoint(String),
    #[error("config validation failed: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<ValidationIssue>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One offending key in a configuration file.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ValidationIssue {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl Error {
    pub fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.into(), reason: reason.into() }
    }

    /// Short machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GridMismatch(_) => "grid_mismatch",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NonFinite(_) => "non_finite",
            Error::Undefined(_) => "undefined",
            Error::EmptyModeSet(_) => "empty_mode_set",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::Regression(_) => "regression",
            Error::Checkpoint(_) => "checkpoint",
            Error::Validation(_) => "validation",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
