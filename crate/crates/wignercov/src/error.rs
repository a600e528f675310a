use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("model error: {reason} ({clipped} eigenvalues below tolerance, most negative {most_negative:e})")]
    Model {
        reason: String,
        clipped: usize,
        most_negative: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
