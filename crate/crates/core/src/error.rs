use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} exceeds the supported maximum")]
    DimensionTooLarge(usize),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parameter `{name}` out of range: {detail}")]
    ParamOutOfRange { name: &'static str, detail: String },

    #[error("average state is singular on the support of outcome {label} (leakage {leakage:.3e})")]
    SingularAverage { label: usize, leakage: f64 },

    #[error("weights are infeasible: inconclusive element has min eigenvalue {min_eigenvalue:.3e}")]
    InfeasibleWeights { min_eigenvalue: f64 },

    #[error("channel is incomplete: |sum K^dag K - I| = {defect:.3e}")]
    IncompleteChannel { defect: f64 },

    #[error("expected a qubit (dimension 2), got dimension {0}")]
    NotQubit(usize),

    #[error("Bloch vector length {0} lies outside the unit ball")]
    BlochOutOfBall(f64),

    #[error("required target Gram matrix is not PSD (min eigenvalue {min_eigenvalue:.3e})")]
    InfeasibleGram { min_eigenvalue: f64 },

    #[error("conclusive weight too large: inconclusive weight a_{label} = {value:.3e} < 0")]
    WeightsTooLarge { label: usize, value: f64 },

    #[error("overlap growth diverges: c D^2 = {0} >= 1")]
    DivergentT(f64),

    #[error("target unreachable: {0}")]
    TargetUnreachable(String),

    #[error("measurement directions are linearly dependent (rank {rank} < {count})")]
    LinearlyDependent { rank: usize, count: usize },

    #[error("target states are inconsistent with the required Gram matrix (defect {0:.3e})")]
    TargetMismatch(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, detail: impl Into<String>) -> Error {
    Error::ParamOutOfRange {
        name,
        detail: detail.into(),
    }
}
