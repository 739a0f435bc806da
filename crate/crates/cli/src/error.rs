use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    File { path: String, source: rbfshapenet::Error },

    #[error(transparent)]
    Core(#[from] rbfshapenet::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// Attaches the offending path to an error raised while touching it.
    pub fn at(path: &Path, source: rbfshapenet::Error) -> Self {
        CliError::File {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 usage, 3 numerical failure, 4 IO (including unreadable model files).
    pub fn exit_code(&self) -> u8 {
        use rbfshapenet::Error as E;
        let core = match self {
            CliError::Usage(_) => return 2,
            CliError::File { source, .. } | CliError::Core(source) => source,
        };
        match core {
            e if e.is_numerical() => 3,
            E::Io(_) | E::CorruptModel(_) | E::SchemaVersionMismatch(_) => 4,
            _ => 2,
        }
    }
}
