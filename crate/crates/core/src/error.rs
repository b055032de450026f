use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Hess F is not positive definite (or not finite) at `point`.
    #[error("potential Hessian is not positive definite at {point:?}")]
    NotKaehler { point: Vec<f64> },

    #[error("moment map is not a submersion at {point:?}")]
    SubmersionFailure { point: Vec<f64> },

    #[error("finite-difference step {step} exceeds configured bound {bound}")]
    StencilTooWide { step: f64, bound: f64 },

    #[error("grid nodes do not determine an affine fit (singular normal equations)")]
    DegenerateGrid,

    #[error("projective point has zero homogeneous coordinates")]
    ZeroPoint,

    #[error("matrix on path is singular at t = {t}")]
    SingularMatrix { t: f64 },

    #[error("line {line}: {source}")]
    OnLine { line: usize, source: Box<Error> },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True when the error (possibly wrapped) is a domain failure of the metric.
    pub fn is_domain_error(&self) -> bool {
        match self {
            Error::NotKaehler { .. }
            | Error::SubmersionFailure { .. }
            | Error::SingularMatrix { .. }
            | Error::ZeroPoint => true,
            Error::OnLine { source, .. } => source.is_domain_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
