use thiserror::Error;

/// Errors raised by the factorizations, solvers and oracles in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shifted matrix is numerically singular (pivot {pivot:e} below {threshold:e})")]
    SingularShift { pivot: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("dense path requested for n = {n}, above the threshold {threshold}")]
    DenseThresholdExceeded { n: usize, threshold: usize },

    #[error("factor width {width} at n = {n} exceeds the configured cap of {cap} entries")]
    WidthCapExceeded { n: usize, width: usize, cap: usize },

    #[error("initial feedback is not stabilizing (max real part of A - B K0^T is {max_real_part:e})")]
    NotStabilizing { max_real_part: f64 },

    #[error("outer iteration stopped after {iterations} steps with criterion {last:e}")]
    MaxOuterIterations { iterations: usize, last: f64 },

    #[error("iteration stopped after {iterations} steps with residual {last:e}")]
    MaxIterations { iterations: usize, last: f64 },

    #[error("feedback matrix is zero; relative change is undefined")]
    ZeroFeedback,

    #[error("Kronecker operator is singular")]
    SingularOperator,

    #[error("solution is not symmetric (relative asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("unknown problem family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularShift { .. } => "SingularShift",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DenseThresholdExceeded { .. } => "DenseThresholdExceeded",
            Error::WidthCapExceeded { .. } => "WidthCapExceeded",
            Error::NotStabilizing { .. } => "NotStabilizing",
            Error::MaxOuterIterations { .. } => "MaxOuterIterations",
            Error::MaxIterations { .. } => "MaxIterations",
            Error::ZeroFeedback => "ZeroFeedback",
            Error::SingularOperator => "SingularOperator",
            Error::Asymmetric(_) => "Asymmetric",
            Error::UnknownFamily(_) => "UnknownFamily",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::MatrixMarket(_) => "MatrixMarket",
            Error::Io(_) => "Io",
        }
    }

    pub(crate) fn dims(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::DimensionMismatch { expected: expected.into(), found: found.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
