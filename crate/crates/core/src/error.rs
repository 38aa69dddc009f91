use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (max |h - h^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid two-qubit state: {0}")]
    InvalidState(String),

    #[error("closed form requires lambda = 1 (got {0})")]
    RequiresPureExcitation(f64),

    #[error("no stationary state without dephasing (gamma = 0)")]
    NoStationaryState,

    #[error("integration step too large: step-halving discrepancy {0:e}")]
    StepTooLarge(f64),

    #[error("eigensolver failed to converge after {0} iterations")]
    NoConvergence(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
