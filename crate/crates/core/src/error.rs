use crate::params::CaseLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires {expected:?}, parameters are {found:?}")]
    WrongCase { expected: CaseLabel, found: CaseLabel },

    #[error("linear map is singular or ill-conditioned (condition number {condition:e})")]
    SingularMap { condition: f64 },

    #[error("metric operator is singular")]
    SingularMetric,

    #[error("Fock dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed on a {dim}×{dim} matrix (max |entry| {max_abs:e}): {reason}")]
    Eigensolver { dim: usize, max_abs: f64, reason: String },

    #[error("generator is not PT-pseudo-Hermitian (residual {residual:e})")]
    NotPseudoHermitian { residual: f64 },

    #[error("initial observable is not PT-pseudo-self-adjoint (residual {residual:e})")]
    InitialNotSelfAdjoint { residual: f64 },

    #[error("trajectory was generated for different parameters")]
    ParamsMismatch,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("cannot parse {input:?} as an exact value: {reason}")]
    Parse { input: String, reason: String },
}
