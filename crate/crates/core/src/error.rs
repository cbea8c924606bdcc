use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to decode image: {0}")]
    Decode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A run-config file that cannot be parsed or fails validation.
    #[error("invalid run config: {0}")]
    RunConfig(String),

    #[error("invalid backbone spec: {0}")]
    Spec(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("duplicate pair ({ref_path}, {dist_path}) at line {line}")]
    Duplicate {
        line: u64,
        ref_path: String,
        dist_path: String,
    },

    #[error("dataset adapter: {0}")]
    Adapter(String),

    #[error("logistic fit failed: {0}")]
    Fit(String),

    #[error("model graph: {0}")]
    Graph(String),

    #[error("serialization: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
