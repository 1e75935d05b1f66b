use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("degenerate groundstate: gap {gap:e} below tolerance {tolerance:e}")]
    DegenerateGroundstate { gap: f64, tolerance: f64 },

    #[error("row oracle is inconsistent at ({row}, {col}): {reason}")]
    InconsistentOracle {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("no modulus in [2..{limit}] separates indices {i} and {j}")]
    NoSeparatingModulus { i: usize, j: usize, limit: usize },

    #[error("step budget exceeded: {requested} steps requested, budget {budget}")]
    StepBudgetExceeded { requested: u64, budget: u64 },

    #[error("consecutive states {index} and {next} have zero overlap")]
    DisconnectedPath { index: usize, next: usize },

    #[error("phase estimation resolution {resolution:e} does not resolve gap/4 = {required:e}")]
    InsufficientPrecision { resolution: f64, required: f64 },

    #[error("chain is not reversible (residual {residual:e})")]
    NotReversible { residual: f64 },

    #[error("chain is not ergodic: eigenvalue 1 has multiplicity {multiplicity}")]
    NotErgodic { multiplicity: usize },

    #[error("proposal graph is disconnected")]
    DisconnectedProposal,

    #[error("empty subspace: {0}")]
    EmptySubspace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
