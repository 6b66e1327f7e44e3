use thiserror::Error;

/// Errors raised by the solver library and the experiment harness.
#[derive(Debug, Error)]
pub enum SocoError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("{operation} is not supported for {family}")]
    Unsupported { operation: &'static str, family: String },

    #[error(
        "{solver} did not converge after {iterations} iterations (residuals: {residual:e}, {secondary:e})"
    )]
    Convergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        secondary: f64,
    },

    #[error("invalid step size: {0}")]
    InvalidStepSize(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("expected {expected} rows, found {found}")]
    Length { expected: usize, found: usize },

    #[error("audit rejected grid: {0}")]
    AuditMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SocoError {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            SocoError::NonFinite(_)
                | SocoError::Convergence { .. }
                | SocoError::InvalidStepSize(_)
                | SocoError::AuditMismatch(_)
        )
    }

    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            SocoError::InvalidArgument(_) => "invalid_argument",
            SocoError::DimensionMismatch { .. } => "dimension_mismatch",
            SocoError::NonFinite(_) => "non_finite",
            SocoError::Unsupported { .. } => "unsupported",
            SocoError::Convergence { .. } => "convergence",
            SocoError::InvalidStepSize(_) => "invalid_step_size",
            SocoError::Parse { .. } => "parse",
            SocoError::Length { .. } => "length",
            SocoError::AuditMismatch(_) => "audit_mismatch",
            SocoError::Io(_) => "io",
            SocoError::Json(_) => "json",
        }
    }

    pub(crate) fn dims(expected: usize, got: usize) -> Self {
        SocoError::DimensionMismatch { expected, got }
    }
}

pub type Result<T> = std::result::Result<T, SocoError>;
