use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("malformed csv {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error(transparent)]
    Core(#[from] fineq::Error),
}

impl CliError {
    /// 2 for anything the caller got wrong, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Config(_) | Self::Read { .. } | Self::Csv { .. } => 2,
            Self::Core(
                fineq::Error::Config(_) | fineq::Error::UnknownName(_) | fineq::Error::Input(_),
            ) => 2,
            Self::Write { .. } | Self::Core(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
