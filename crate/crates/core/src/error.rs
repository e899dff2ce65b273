use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("grid under-resolves band limit {needed} (grid resolves {available})")]
    Resolution { needed: usize, available: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operators live on different levels (k = {0} vs k = {1})")]
    LevelMismatch(usize, usize),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("path has no usable classical flow: {0}")]
    Flow(String),

    #[error("not a loop: time-1 map moves a grid point by {0:.3e}")]
    NotALoop(f64),

    #[error("insufficient data: {usable} usable samples, need at least 3")]
    InsufficientData { usable: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown name: {0}")]
    UnknownName(String),
}

pub type Result<T> = std::result::Result<T, Error>;
