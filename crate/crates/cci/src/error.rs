use std::path::PathBuf;

use cci_core::MonthStamp;

/// Errors from file formats, the remote data client and configuration.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{source_name}: missing months {}", format_months(.missing))]
    Gap { source_name: String, missing: Vec<MonthStamp> },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("no cached response at {0} (offline mode)")]
    CacheMiss(PathBuf),
    #[error("config `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Core(#[from] cci_core::Error),
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        IngestError::Parse { path: path.into(), line, message: message.into() }
    }

    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        IngestError::Config { key: key.to_string(), message: message.into() }
    }
}

fn format_months(months: &[MonthStamp]) -> String {
    months.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, IngestError>;
