use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not positive definite (block {block})")]
    NotPositiveDefinite { block: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("graph contains a directed cycle")]
    Cycle,
    #[error("requested {requested} edges but at most {max} fit in a DAG")]
    TooManyEdges { requested: usize, max: usize },
    #[error("correlation parameter {0} outside the admissible range")]
    InvalidCorrelation(f64),
    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("covariance repair did not reach positive definiteness after {rounds} rounds")]
    RepairFailed { rounds: usize },
    #[error("no off-diagonal non-zero entries to score")]
    EmptyScoreSet,
    #[error("ridge system is singular for node {node}; use a positive penalty")]
    SingularDesign { node: usize },
    #[error("missing input: {0}")]
    MissingInput(String),
}
