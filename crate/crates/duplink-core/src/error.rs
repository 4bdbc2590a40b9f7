//! Crate-wide error type. Focused modules keep their own error enums and
//! convert into this one at the API boundary.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Frame(#[from] crate::frame::FrameError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("series: {0}")]
    Series(String),
    #[error("trace: {0}")]
    Trace(String),
    #[error("tunnel: {0}")]
    Tunnel(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Configuration problems, reported in bulk where possible so a bad file is
/// fixed in one pass rather than error by error.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("unresolved reference: {0}")]
    Unresolved(String),
    #[error("missing availability cells: {}", .0.join(", "))]
    MissingCells(Vec<String>),
    #[error("cannot read {path}: {source}")]
    Read {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}
