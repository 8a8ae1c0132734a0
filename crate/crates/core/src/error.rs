use thiserror::Error;

/// Errors raised by the operator substrate, the state types and the update rules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| entry {0:e})")]
    NotHermitian(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ambiguous eigenvalue clustering: gap {gap:e} lies within ({lower:e}, {upper:e})")]
    ClusterAmbiguity { gap: f64, lower: f64, upper: f64 },

    #[error("outcome {outcome} is impossible (probability {probability:e})")]
    ImpossibleOutcome { outcome: f64, probability: f64 },

    #[error("weight {weight:e} assigned to impossible outcome {outcome}")]
    ImpossibleOutcomeInSupport { outcome: f64, weight: f64 },

    #[error("outcome {0} is not an eigenvalue of the projector family")]
    UnknownOutcome(f64),

    #[error("basis vector {index} is not inside a single eigenspace (leakage {leakage:e})")]
    BasisNotRefining { index: usize, leakage: f64 },

    #[error("eigenvalue {0} is not covered by any bin")]
    UncoveredEigenvalue(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed matrix data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
