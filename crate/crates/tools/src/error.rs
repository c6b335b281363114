use std::io;
use std::path::PathBuf;

/// Errors surfaced by the command-line tool, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: format error at byte {offset}: {message}")]
    Format {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("{path}:{line}: {message}")]
    Csv {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Core(#[from] srp_core::Error),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl ToolError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ToolError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: &std::path::Path, e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(source) => ToolError::io(path, source),
            kind => ToolError::Csv {
                path: path.to_path_buf(),
                line,
                message: format!("{kind:?}"),
            },
        }
    }

    /// 2 config error, 3 data error, 4 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Config(_) => 2,
            ToolError::Core(srp_core::Error::InvalidParameter(_))
            | ToolError::Core(srp_core::Error::EnumerationTooLarge(_)) => 2,
            ToolError::Invariant(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;
