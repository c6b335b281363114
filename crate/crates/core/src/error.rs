use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    Dimension {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("conversion error: {0}")]
    Conversion(String),

    #[error("value outside the activation domain: {0}")]
    Domain(String),

    #[error("ANN and SNN are not a converted pair: {0}")]
    Pairing(String),

    #[error("enumeration refused: {0}")]
    EnumerationTooLarge(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Diverged {
        epoch: usize,
        batch: usize,
        loss: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
