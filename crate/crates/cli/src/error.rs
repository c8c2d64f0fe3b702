use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("rerun required: stage `{stage}` {reason}")]
    Stale { stage: &'static str, reason: String },
    #[error(transparent)]
    Core(#[from] aetas::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 config, 3 data, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Stale { .. } => 2,
            CliError::Core(aetas::Error::InvalidSpec(_)) => 2,
            CliError::Core(e) if e.is_numeric() => 4,
            CliError::Core(_) | CliError::Io { .. } => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> CliResult<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> CliResult<T> {
        self.map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })
    }
}
