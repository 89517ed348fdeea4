use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative transition probability {value} at ({x}, {y})")]
    NegativeEntry { x: usize, y: usize, value: f64 },

    #[error("row {x} sums to {sum}, not 1")]
    RowSumViolation { x: usize, sum: f64 },

    #[error("invalid stationary distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid mixture weights: {0}")]
    BadWeights(String),

    #[error("kernel is not irreducible")]
    NotIrreducible,

    #[error("kernel is not reversible for the given distribution (residual {residual:e})")]
    NotReversible { residual: f64 },

    #[error("kernel has period {period} and the observable has spectral mass {mass:e} at -1")]
    NotAperiodic { period: usize, mass: f64 },

    #[error("observable is not centered (mean {mean:e})")]
    NotCentered { mean: f64 },

    #[error("eigensolver did not reach the residual contract (residual {residual:e})")]
    EigensolverFailure { residual: f64 },

    #[error(
        "spectral radius {rho} is within tolerance of 1; autocovariance series cannot be truncated"
    )]
    SpectralRadiusOne { rho: f64 },

    #[error("kernels are stationary for different distributions (max difference {max_diff:e})")]
    DifferentStationary { max_diff: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("need at least {required} batches, only {available} available")]
    TooFewBatches { available: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
