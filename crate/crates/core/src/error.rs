use std::path::PathBuf;

use crate::econ::EconError;
use crate::market_data::MarketDataError;
use crate::regression::RegressionError;
use crate::synthetic::SyntheticError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config not found: {}", .0.display())]
    ConfigNotFound(PathBuf),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    MarketData(#[from] MarketDataError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Synthetic(#[from] SyntheticError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    /// Process exit code: 2 for usage/config problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigNotFound(_) | Error::Config(_) | Error::Synthetic(SyntheticError::Invalid(_)) => 2,
            _ => 1,
        }
    }

    /// Short machine-readable kind used in single-line CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ConfigNotFound(_) => "config_not_found",
            Error::Config(_) => "config",
            Error::MarketData(_) => "market_data",
            Error::Econ(_) => "estimation",
            Error::Regression(_) => "regression",
            Error::Synthetic(SyntheticError::Invalid(_)) => "config",
            Error::Synthetic(_) => "simulation",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Runtime(_) => "runtime",
        }
    }
}
