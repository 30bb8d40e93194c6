use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("unsupported problem kind: {0}")]
    UnsupportedKind(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rejection sampling exceeded {attempts} attempts")]
    RejectionBudgetExceeded { attempts: usize },

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("P has mass {mass} at {index} where Q has none")]
    SupportMismatch { index: i64, mass: f64 },

    #[error("truncation window is empty")]
    EmptyTruncationWindow,

    #[error("exact enumeration of {count} candidates exceeds the cap {cap}")]
    InfeasibleExact { count: f64, cap: f64 },

    #[error("rows must form a square n x n bit matrix: {0}")]
    ShapeMismatch(String),

    #[error("graph with {n} vertices exceeds the exact-search cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("detector `{detector}` is incompatible with problem kind {kind}")]
    IncompatibleDetector { detector: String, kind: String },

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("trial {trial} failed: {source}")]
    TrialFailed {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams { field, reason: reason.into() }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams { .. }
                | Error::UnsupportedKind(_)
                | Error::IncompatibleDetector { .. }
                | Error::UnknownDetector(_)
                | Error::Format(_)
                | Error::DimensionMismatch { .. }
                | Error::ShapeMismatch(_)
                | Error::EmptyTruncationWindow
                | Error::NotApplicable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
