use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("block multiplicities differ: {left:?} vs {right:?}")]
    BlockMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("unsupported family configuration: {0}")]
    Family(String),

    /// Spectrum document problems; `line` is 1-based when known.
    #[error("spectrum{}: {message}", .line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Spectrum { line: Option<usize>, message: String },

    #[error("H_{k} = {value} is not positive; the index pipeline requires H_k > 0")]
    NonPositiveH { k: u32, value: f64 },

    #[error("certificate unavailable: {0}")]
    Certificate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// True for errors that originate in the numerics rather than in the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Certificate(_))
    }
}
