use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: not found: {}", path.display())]
    NotFound { what: &'static str, path: PathBuf },

    #[error("{what}: {source}")]
    Io {
        what: &'static str,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("preprocessing removed every {what} (thresholds: {thresholds})")]
    NothingLeft {
        what: &'static str,
        thresholds: String,
    },

    #[error("unknown field `{name}`{}", hint.as_ref().map(|h| format!(" (did you mean `{h}`?)")).unwrap_or_default())]
    UnknownField { name: String, hint: Option<String> },

    #[error("target not modeled: `{0}` was removed during preprocessing")]
    TargetNotModeled(String),

    #[error("target `{0}` is not a categorical field")]
    NotCategorical(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("k-modes: k = {k} exceeds the {distinct} distinct rows")]
    TooManyClusters { k: usize, distinct: usize },

    #[error("model artifact: {0}")]
    Artifact(String),

    #[error("evaluation: {0}")]
    Evaluation(String),
}

impl Error {
    pub fn io(what: &'static str, path: &std::path::Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound {
                what,
                path: path.to_path_buf(),
            }
        } else {
            Error::Io { what, source }
        }
    }

    /// Process exit code for the command-line tool: 2 for I/O, 3 for unknown or unmodeled fields, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotFound { .. } | Error::Io { .. } => 2,
            Error::UnknownField { .. } | Error::TargetNotModeled(_) | Error::NotCategorical(_) => 3,
            _ => 4,
        }
    }
}
