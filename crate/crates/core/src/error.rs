use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty graph: {0}")]
    EmptyGraph(String),

    #[error("split ratios must be positive and sum to 1 (got {0:?})")]
    InvalidRatios([f64; 3]),

    #[error("shape mismatch for {what}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("user {0} has interacted with every item; no negative can be sampled")]
    NoNegativeItem(usize),

    #[error("target homophily {target} unreachable: best achieved {best}")]
    UnreachableTarget { target: f64, best: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
