//! The static bid-price policy, its simulator, and the exact dynamic
//! program used as an oracle on small instances.

pub mod dp;
pub mod simulate;

pub use dp::{dap_upper_bound, dp_solve, DpDecision, DpSolution, DEFAULT_STATE_BUDGET};
pub use simulate::{
    capacities, mean_and_standard_error, replication_rng, simulate_policy, simulate_replications, simulate_with_capacities,
    yield_per_impression, PolicyConfig, SimOutcome,
};

use crate::dual::{solve_dual, DualSolution, SolveOptions};
use crate::error::Result;
use crate::exchange::Response;
use crate::market::MarketModel;
use crate::tiebreak::{solve_tiebreak_flow, TieTable, FLOW_TOLERANCE};

/// Solves the dual and splits the resulting ties into a routing rule.
pub fn optimal_policy(model: &MarketModel, response: &dyn Response, opts: &SolveOptions) -> Result<(DualSolution, PolicyConfig)> {
    let solution = solve_dual(model, response, opts)?;
    let ties = TieTable::from_events(&solution.evaluation.table);
    let tiebreak = solve_tiebreak_flow(&ties, &model.rho(), FLOW_TOLERANCE)?;
    let config = PolicyConfig { v: solution.v.clone(), tiebreak };
    Ok((solution, config))
}
