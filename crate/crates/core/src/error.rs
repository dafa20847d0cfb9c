use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or point violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// `y == x`: the kernel has its logarithmic singularity there.
    #[error("singular pair: y and x coincide at ({y1}, {y2})")]
    Singular { y1: f64, y2: f64 },

    /// A quadrature did not reach its tolerance within budget.
    #[error("accuracy error: best estimate {estimate:e} with error {error_estimate:e}")]
    Accuracy { estimate: f64, error_estimate: f64 },

    /// An evaluation point has the wrong classification for the requested
    /// operation (e.g. reconstructing outside the domain).
    #[error("classification error: point ({x1}, {x2}) is {class}")]
    Classification { x1: f64, x2: f64, class: String },

    /// Tabulated data does not cover the truncation window.
    #[error("coverage error: data covers [{lo}, {hi}] but [-{required}, {required}] is required")]
    Coverage { lo: f64, hi: f64, required: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable code used in batch CSV output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Singular { .. } => "singular",
            Error::Accuracy { .. } => "accuracy",
            Error::Classification { .. } => "classification",
            Error::Coverage { .. } => "coverage",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Internal(_) => "internal",
        }
    }
}
