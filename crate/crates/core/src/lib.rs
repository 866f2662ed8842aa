//! Shortest curvature-constrained planar curves through ordered waypoints.
//!
//! Each stage between consecutive nodes is described by five subarc lengths in
//! the slot order `L R S L R`. The crate evaluates such curves, solves the
//! resulting finite-dimensional program from Dubins-seeded multi-starts and
//! audits candidates against the maximum-principle conditions.

pub mod dubins;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod nlp;
pub mod rollout;
pub mod scalar;
pub mod stationarity;

pub use dubins::{
    dubins_candidates, dubins_shortest, embed_word, seed_from_dubins, DubinsCandidate, DubinsFamily, DubinsSolution,
};
pub use error::{DubinsError, MatrixError, ProblemError, SolveError, StationarityError};
pub use model::{
    validate_problem, word_of, OrientedPoint, PathSample, PathSolution, ProblemSpec, SampledPath, StageHeading, StageHeadings,
    SubarcKind, SubarcMatrix, Waypoint, SLOTS,
};
pub use nlp::{prune_and_refine, solve, solve_local, ConvergenceRecord, LocalOutcome, SolveOutcome, SolverConfig};
pub use rollout::{residuals, rollout_path, sample_path, StageResidual};
pub use scalar::Scalar;
pub use stationarity::{
    audit, check_midpoint, check_subarc_bound, classify_stage, reconstruct_multipliers, switching_function_profile, Multipliers,
    Reconstruction, StageClass, StageType, StationarityReport, Verdict,
};

/// Double-precision aliases.
pub type Problem = ProblemSpec<f64>;
pub type Pose = OrientedPoint<f64>;
pub type Point = Waypoint<f64>;
pub type Matrix5 = SubarcMatrix<f64>;
pub type Solution = PathSolution<f64>;
pub type Config = SolverConfig<f64>;
pub type Outcome = SolveOutcome<f64>;
pub type Report = StationarityReport<f64>;
