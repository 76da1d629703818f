use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("group layout covers {layout} coefficients but the vector has {len}")]
    LayoutMismatch { layout: usize, len: usize },

    #[error("power iteration did not converge within {0} steps")]
    NoConvergence(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("true weight vector is zero; NMSE is undefined")]
    ZeroReference,

    #[error("evaluation window is empty")]
    EmptyWindow,

    #[error("trace lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("contraction audit requires a firm-thresholding trace")]
    NotFirmThresholding,

    #[error("fixture parse error: {0}")]
    Fixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
