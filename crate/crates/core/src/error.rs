use thiserror::Error;

/// Every failure the library can report.
///
/// The CLI maps these onto exit codes: validation errors to 2, solver errors to 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("constraint violated at {location}: {message}")]
    Constraint { location: String, message: String },

    #[error("unsupported boundary partition: {0}")]
    UnsupportedPartition(String),
    #[error("extension truncation too small for plate mode {index}: residual {residual:e}")]
    TruncationTooSmall { index: usize, residual: f64 },
    #[error("nonpositive weight {value:e} at node {node}")]
    NonpositiveWeight { node: usize, value: f64 },
    #[error("coefficient degenerates: alpha = {alpha} at t = {t}, x = {x:?}")]
    Degeneracy { t: f64, x: Vec<f64>, alpha: f64 },
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("unsupported signal: {0}")]
    UnsupportedSignal(String),
    #[error("time grids or bases differ: {0}")]
    GridMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("missing derivative: {0}")]
    MissingDerivative(String),
    #[error("nonpositive energy on fit window at t = {t}")]
    NonpositiveEnergy { t: f64 },
    #[error("no convergence after {iterations} iterations (last distance {last:e})")]
    NoConvergence { iterations: usize, last: f64 },
}

impl Error {
    /// Short class name, written to run manifests.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Schema { .. } => "SchemaError",
            Error::Constraint { .. } => "ConstraintError",
            Error::UnsupportedPartition(_) => "UnsupportedPartition",
            Error::TruncationTooSmall { .. } => "TruncationTooSmall",
            Error::NonpositiveWeight { .. } => "NonpositiveWeight",
            Error::Degeneracy { .. } => "DegeneracyError",
            Error::SolveFailure(_) => "SolveFailure",
            Error::UnsupportedSignal(_) => "UnsupportedSignal",
            Error::GridMismatch(_) => "GridMismatch",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::MissingDerivative(_) => "MissingDerivative",
            Error::NonpositiveEnergy { .. } => "NonpositiveEnergy",
            Error::NoConvergence { .. } => "NoConvergence",
        }
    }

    /// True for errors raised while reading or validating input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Schema { .. }
                | Error::Constraint { .. }
                | Error::UnsupportedPartition(_)
                | Error::UnsupportedSignal(_)
        )
    }

    /// JSON pointer of an input error, or the space-time site of a degeneracy.
    pub fn location(&self) -> Option<String> {
        match self {
            Error::Parse { location, .. } | Error::Schema { location, .. } | Error::Constraint { location, .. } => {
                Some(location.clone())
            }
            Error::Degeneracy { t, x, .. } => Some(format!("t = {t:?}, x = {x:?}")),
            _ => None,
        }
    }

    pub(crate) fn constraint(location: &str, message: impl Into<String>) -> Self {
        Error::Constraint {
            location: location.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
