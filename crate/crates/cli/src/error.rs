use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] dimer::Error),

    /// Bad flag values, conflicting parameter sets, malformed config files.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for rejected input, 3 for numerical failure, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::Model(_) | CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Serialize(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
