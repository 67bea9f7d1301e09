use thiserror::Error;

use crate::fitting::SubtractiveFit;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("not strictly monotone: {0}")]
    NonMonotone(String),
    #[error("parameter constraint violated: {0}")]
    Param(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("empty grid: {0}")]
    EmptyGrid(String),
    #[error("too many excluded points: {excluded} of {total} in {check}")]
    Excluded {
        check: String,
        excluded: usize,
        total: usize,
    },
    #[error("division by zero: {0}")]
    Division(String),
    #[error("grid not symmetric about 1/2: {0}")]
    GridSymmetry(String),
    #[error("link leaves ]0,1[: {0}")]
    LinkRange(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("non-positive value: {0}")]
    NonPositive(String),
    #[error("fit diverged: {0}")]
    Divergence(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("alternating fit did not converge after {rounds} rounds")]
    NonConvergence {
        rounds: usize,
        best: Box<SubtractiveFit>,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("{op}: {source}")]
    Op {
        op: String,
        #[source]
        source: Box<Error>,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wraps the error with the name of the operation that raised it.
    pub fn within(self, op: impl Into<String>) -> Error {
        Error::Op {
            op: op.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping operation wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Op { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Maps a computed value to `Ok` when finite, else a domain error.
pub(crate) fn finite(value: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{} is not finite ({value})", what())))
    }
}
