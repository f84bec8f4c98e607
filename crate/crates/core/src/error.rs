use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("event index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error(
        "threshold function undefined at {needed}: total mass S_N = {available} (deficit {deficit})"
    )]
    ThresholdUndefined {
        needed: usize,
        available: f64,
        deficit: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
