//! The constrained program in the subarc lengths and its solvers.

pub mod instance;
pub mod local;

pub use instance::{assemble, NlpInstance};
pub use local::{kkt_measure, multiplier_estimate, polish, solve_local, solve_local_with, LocalLimits, LocalOutcome};
pub mod solve;

pub use solve::{canonical_structure, prune_and_refine, solve, start_headings, ConvergenceRecord, SolveOutcome, SolverConfig};
