use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing upstream artifact {}; run `{stage}` first", path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("output directory is locked by another run ({})", .0.display())]
    Locked(PathBuf),
    #[error("{0}")]
    Data(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::MissingArtifact { .. } => 2,
            CliError::Locked(_) => 3,
            CliError::Data(_) | CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::MissingArtifact { .. } => "missing_artifact",
            CliError::Locked(_) => "locked",
            CliError::Data(_) => "data",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON error record for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        serde_json::to_string(&Record {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("error records serialize")
    }

    pub fn data(e: impl std::fmt::Display) -> CliError {
        CliError::Data(e.to_string())
    }
}
