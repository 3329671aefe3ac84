use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    InvalidParameter(String),

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular linear system at row {row}")]
    SingularSystem { row: usize },

    #[error("winding undefined: sample {index} has modulus {modulus:.3e} below {threshold:.3e}")]
    WindingUndefined {
        index: usize,
        modulus: f64,
        threshold: f64,
    },

    #[error("boundary average vanishes, phase normalization undefined")]
    VanishingAverage,

    #[error("malformed snapshot at line {line}: {message}")]
    Snapshot { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
