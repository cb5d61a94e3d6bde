use thiserror::Error;

/// Errors raised by model construction, the solvers and the evaluation helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlrError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Every component density underflowed for one sample.
    #[error("degenerate responsibility row {row}: all component densities vanish")]
    DegenerateRow { row: usize },

    #[error("weighted Gram matrix of component {component} is singular")]
    SingularGram { component: usize },

    #[error("inner LAD solver for component {component} stalled after {iterations} iterations")]
    SolverStall { component: usize, iterations: usize },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sample variance is zero")]
    ZeroVariance,
}

pub type Result<T, E = MlrError> = std::result::Result<T, E>;
