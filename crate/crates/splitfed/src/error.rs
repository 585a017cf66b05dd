//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or parameter dimensions do not line up. The message names the
    /// offending axis.
    #[error("shape error: {0}")]
    Shape(String),

    /// An input value violates a documented precondition (non-binary mask,
    /// degenerate domain spec, empty sample list, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A container file (SFPS / SFDS) is malformed. `offset` is the byte
    /// position at which parsing failed.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// A container file carries a version this build does not understand.
    #[error("unsupported version 0x{0:02x}")]
    UnsupportedVersion(u8),

    /// A wire frame or message could not be decoded.
    #[error("decode error: {0}")]
    Decode(String),

    /// The peer answered with an ERROR frame.
    #[error("protocol error 0x{code:04x}: {message}")]
    Protocol { code: u16, message: String },

    /// The byte stream ended mid-frame (dirty close) or another transport
    /// level failure occurred.
    #[error("transport error: {0}")]
    Transport(String),

    /// Bad run configuration (contract mismatch, missing checkpoint, ...).
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn decode(msg: impl Into<String>) -> Self {
        Error::Decode(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
