use std::path::PathBuf;

use thiserror::Error;

use crate::graph::ValidationReport;

/// Errors raised by base-kernel evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("label shape mismatch for {kernel} kernel: {detail}")]
    ShapeMismatch { kernel: &'static str, detail: String },
    #[error("{kernel} kernel value {value} outside the admissible range {range}")]
    OutOfRange {
        kernel: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse kernel `{0}` (expected const1, delta:H, se:ALPHA or poly:C0,C1,...)")]
    BadKernelString(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dense system of size {size} exceeds the guard of {guard}")]
    GuardExceeded { size: usize, guard: usize },
    #[error("dense factorization failed; the system is not positive definite")]
    Factorization,
    #[error("fixed-point iteration is not contracting (change grew for {0} consecutive sweeps)")]
    NoContraction(usize),
    #[error("permutation error: {0}")]
    Permutation(String),
    #[error("missing node coordinates: {0}")]
    MissingCoordinates(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-positive diagonal entry {value} at index {index}")]
    NonPositiveDiagonal { index: usize, value: f64 },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
