use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("follower type index {index} out of range (K = {types})")]
    TypeIndex { index: usize, types: usize },

    #[error("vector is not a point of the {dim}-simplex: {reason}")]
    NotOnSimplex { dim: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid memory model: {0}")]
    Memory(String),

    #[error("linear program is numerically degenerate: {0}")]
    LpDegenerate(String),

    #[error("profile count M^K = {count} exceeds the cap {cap}")]
    ProfileCap { count: String, cap: usize },

    #[error("no best-response profile is feasible (internal error)")]
    NoFeasibleProfile,

    #[error("leader dimension N = {n} exceeds the grid cap {cap} for the quantal oracle")]
    GridCap { n: usize, cap: usize },

    #[error("oracle failed in round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied input rather than a failure
    /// during computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidGame(_)
                | Error::Config(_)
                | Error::Memory(_)
                | Error::Json(_)
                | Error::TypeIndex { .. }
                | Error::NotOnSimplex { .. }
                | Error::Dimension { .. }
                | Error::Io { .. }
        )
    }
}
