use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid model parameter: {0}")]
    ModelParam(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("size mismatch: expected {expected} samples, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite state at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("smallness violated at step {step} (t = {t}): energy norm {norm:.6e} exceeds bound {bound:.6e}")]
    SmallnessViolated {
        step: usize,
        t: f64,
        norm: f64,
        bound: f64,
    },

    #[error("degenerate inertia count: zero pivot at shift {0:e}")]
    Breakdown(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed csv at line {line}: {msg}")]
    Csv {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors a user fixes by editing the configuration.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::UnknownModel(_) | Error::ModelParam(_) | Error::Grid(_)
        )
    }
}
