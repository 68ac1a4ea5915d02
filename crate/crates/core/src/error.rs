use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A size guard refused the computation.
    #[error("budget guard `{guard}` exceeded: requires {required}, limit {limit}")]
    Budget {
        guard: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("vector not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("interaction constant lambda_V is undefined for a vanishing interaction")]
    UndefinedLambda,

    #[error("slot sets overlap at particle {0}")]
    SlotOverlap(usize),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
