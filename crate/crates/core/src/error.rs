use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("corpus needs at least 2 documents, got {0}")]
    TooFewDocuments(usize),
    #[error("document {0:?} has no tokens left after filtering")]
    EmptyDocument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix contains a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("eigensolver did not converge for eigenvalue {0}")]
    NonConvergence(usize),
    #[error("{what} = {value} out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("document {0} has zero degree in the similarity graph")]
    IsolatedDocument(usize),
    #[error("row {0} is a zero vector and cannot be normalized")]
    ZeroVector(usize),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("document {0} is alone in its cluster; membership score is undefined")]
    SingletonNoScore(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Numerical failures (as opposed to bad input) map to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_))
    }
}
