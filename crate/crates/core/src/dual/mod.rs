//! The dual of the deterministic approximation and its solvers.

pub mod eval;
pub mod quality;
pub mod saa;
pub mod solve;

pub use eval::{dual_derivatives, dual_objective, DualEvaluation, DualProblem, MonteCarloEvaluation};
pub use quality::{solve_dual_quality_constrained, QualityOptions, QualitySolution};
pub use saa::{lower_quantile_index, solve_dual_saa};
pub use solve::{solve_dual, solve_problem, DualSolution, SolutionSummary, SolveOptions};
