use thiserror::Error;

/// Invalid problem data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("consecutive nodes {0} and {1} coincide")]
    DistinctNodesViolation(usize, usize),
    #[error("curvature bound must be positive, got {0}")]
    NonpositiveCurvatureBound(f64),
    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),
}

/// Malformed subarc matrix.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("subarc matrix needs at least one stage")]
    Empty,
    #[error("entry ({stage}, {slot}) is negative or not finite")]
    InvalidEntry { stage: usize, slot: usize },
    #[error("matrix has {found} stages, problem has {expected}")]
    StageCountMismatch { expected: usize, found: usize },
}

/// Failures of the single-stage closed-form solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DubinsError {
    #[error("start and end positions coincide")]
    CoincidentPoints,
    #[error("no feasible path family")]
    NoFeasibleFamily,
    #[error("word {0:?} cannot be embedded into the L,R,S,L,R slot pattern")]
    EmbeddingImpossible(String),
    #[error("expected {expected} interior headings, got {found}")]
    HeadingCount { expected: usize, found: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Failures of the constrained solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("iteration limit reached (constraint residual {residual:e}, kkt {kkt:e})")]
    MaxIterationsExceeded { residual: f64, kkt: f64 },
    #[error("penalty parameter diverged (constraint residual {residual:e})")]
    DivergedPenalty { residual: f64 },
    #[error("refinement could not reach tolerance on the pruned structure (residual {residual:e}, kkt {kkt:e})")]
    StructureInfeasible { residual: f64, kkt: f64 },
    #[error("no start converged")]
    NoSolutionFound,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Dubins(#[from] DubinsError),
}

/// Failures of the necessary-condition audit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationarityError {
    #[error("stage {0} does not match any admissible arc structure")]
    NonconformingStage(usize),
    #[error("multipliers are required for the switching-function profile")]
    MultiplierMissing,
}
