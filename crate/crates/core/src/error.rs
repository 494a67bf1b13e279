use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:.3e} exceeds 1e-10")]
    NonHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e}")]
    NotPsd { eigenvalue: f64 },

    #[error("eigensolver failed to converge on order-{order} matrix (off-diagonal norm {off_diagonal:.3e})")]
    NoConvergence { order: usize, off_diagonal: f64 },

    #[error("eigenvector residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    InaccurateEigenvectors { residual: f64, tolerance: f64 },

    #[error("dead channel(s) with zero variance: rows {rows:?}")]
    DeadChannel { rows: Vec<usize> },

    #[error("aspect ratio c = p/n = {p}/{n} = {c:.4} must lie in (0, 1]")]
    Ratio { p: usize, n: usize, c: f64 },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
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
}
