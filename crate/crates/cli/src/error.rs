use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] moyal_core::Error),

    #[error("strict mode: {}", .0.join("; "))]
    Strict(Vec<String>),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for numerical failures, 1 for everything the user can fix by
    /// changing the input.
    pub fn exit_code(&self) -> u8 {
        use moyal_core::Error as E;
        match self {
            Self::Strict(_) => 2,
            Self::Core(E::IllConditioned { .. } | E::Precision(_) | E::Consistency(_)) => 2,
            _ => 1,
        }
    }
}
