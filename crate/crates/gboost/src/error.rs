use thiserror::Error;

use crate::core::NodeId;

/// Errors surfaced across the search stack.
#[derive(Debug, Error)]
pub enum GBoostError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("node {0:?} not found")]
    NodeNotFound(NodeId),

    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("backend '{backend}' failed at position {position}: {message}")]
    Backend {
        backend: String,
        position: usize,
        message: String,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("transport error after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },

    #[error("request rejected ({status}): {message}")]
    Request { status: u16, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GBoostError>;
