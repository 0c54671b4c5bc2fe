use std::path::PathBuf;

use thiserror::Error;

/// Which side of a matched pair an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum View {
    First,
    Second,
}

impl std::fmt::Display for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            View::First => f.write_str("view 1"),
            View::Second => f.write_str("view 2"),
        }
    }
}

#[derive(Debug, Error)]
pub enum GwcaError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size mismatch: graphs have {n1} and {n2} nodes; pad the pair first")]
    SizeMismatch { n1: usize, n2: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("correlation matrix of {view} is singular after regularization (reg = {reg:e})")]
    Singular { view: View, reg: f64 },

    #[error("embedding row {row} has zero norm; cosine similarity is undefined")]
    ZeroNormRow { row: usize },

    #[error("ground truth {truth} is absent from the ranked corpus of query {query}")]
    MissingTruth { query: usize, truth: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl GwcaError {
    /// Errors that stem from the numbers rather than from the inputs' shape or syntax.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GwcaError::Singular { .. }
                | GwcaError::DimensionMismatch(_)
                | GwcaError::SizeMismatch { .. }
                | GwcaError::MissingTruth { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, GwcaError>;
