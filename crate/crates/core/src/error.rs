use std::fmt;

use crate::solver::IterateRecord;

pub type Result<T> = std::result::Result<T, Error>;

/// Array shape as `(rows, cols)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape(pub usize, pub usize);

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: Shape, found: Shape },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("division by zero: {0}")]
    ZeroNorm(&'static str),

    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("operation not supported: {0}")]
    Unsupported(&'static str),

    #[error("iteration diverged at k = {iteration}: non-finite iterate")]
    Divergence {
        iteration: usize,
        trace: Box<Vec<IterateRecord>>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
