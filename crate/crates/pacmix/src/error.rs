use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated (empty dataset, bad size, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two objects that must agree in shape (dimensions, pool layout) do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// KL divergence is infinite: the left distribution puts mass where the
    /// right one has none. Distinguished from other failures so callers can
    /// react (e.g. reject a prior) instead of treating it as a crash.
    #[error("infinite divergence: posterior has support where the prior has none")]
    InfiniteDivergence,

    /// A numeric routine failed (singular system, non-finite objective).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A CSV dataset file could not be parsed.
    #[error("csv parse error at line {line}: {msg}")]
    CsvParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
