use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    ValidationFailed(String),

    #[error(transparent)]
    Core(#[from] duotherm::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 ok, 1 validation or evaluation failure, 2 configuration, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        use duotherm::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::ValidationFailed(_) => 1,
            CliError::Core(e) => match e {
                E::Configuration(_) | E::Dimension(_) => 2,
                E::Io(_) | E::Csv(_) => 3,
                _ => 1,
            },
        }
    }
}
