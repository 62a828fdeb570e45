use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no split available: every feature is constant")]
    NoSplit,

    /// One side of the reweighted masses vanished, so the weight of the
    /// classifier at `level` is unbounded.
    #[error("infinite weight at step {level}: a_k = {misclassified_mass}, b_k = {correct_mass}")]
    InfiniteWeight {
        level: usize,
        misclassified_mass: f64,
        correct_mass: f64,
    },

    #[error("coercivity error: leaf {index} has zero count, possibly unbounded below direction exists")]
    Coercivity { index: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors that come from the numerics (unbounded weights, no
    /// minimizer) rather than from malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::InfiniteWeight { .. } | Error::Coercivity { .. })
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::NoSplit => "no-split",
            Error::InfiniteWeight { .. } => "infinite-weight",
            Error::Coercivity { .. } => "coercivity",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
