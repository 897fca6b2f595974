use thiserror::Error;

/// Errors raised by the numerical kernels, solvers and protocol simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is rank deficient (smallest/largest singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("water-filling needs at least one positive gain")]
    EmptyGains,

    #[error("covariance trace {trace} exceeds budget {budget}")]
    TraceBudgetExceeded { trace: f64, budget: f64 },

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("sub-channel gain is zero")]
    ZeroGain,

    #[error("inconsistent protocol inputs: {0}")]
    InconsistentInputs(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solution violates its constraint set: {0}")]
    InfeasibleSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;
