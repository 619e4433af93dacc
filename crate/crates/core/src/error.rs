use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distance {distance} m is below the reference distance {reference} m")]
    BelowReferenceDistance { distance: f64, reference: f64 },

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("degenerate geometry: Fisher matrix is not positive definite (det = {det:e})")]
    DegenerateGeometry { det: f64 },

    #[error("covariance is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("no hidden-layer size up to {max_neurons} meets the error threshold {threshold_m} m")]
    NeuronsExhausted { max_neurons: usize, threshold_m: f64 },

    #[error("least-squares system is rank deficient")]
    RankDeficient,

    #[error("{}line {line}: {msg}", source_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("stream join produced no samples ({0})")]
    EmptyJoin(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn source_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            msg: msg.into(),
        }
    }

    /// Attach a file path to a parse error; other variants pass through.
    pub fn with_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: Some(path.into()),
                line,
                msg,
            },
            other => other,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
