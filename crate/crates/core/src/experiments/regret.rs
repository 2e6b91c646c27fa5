use serde::{Deserialize, Serialize};

use crate::dual::SolveOptions;
use crate::error::Result;
use crate::exchange::Response;
use crate::market::MarketModel;
use crate::policy::{mean_and_standard_error, optimal_policy, simulate_replications};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub n: u64,
    /// Mean of `1 - yield / (N psi(v*))` over replications.
    pub mean_regret: f64,
    /// Half-width of the 95% normal band.
    pub band: f64,
    /// `K(rho) / sqrt(N)`.
    pub bound: f64,
    pub dual_value: f64,
    pub reps: u64,
}

/// `sqrt(A / (A + 1) * sum_{a in A_0} (1 - rho_a) / rho_a)`, the outside
/// option included with share `1 - sum rho`.
pub fn regret_constant(rho: &[f64]) -> f64 {
    let a = rho.len() as f64;
    let outside = 1.0 - rho.iter().sum::<f64>();
    let sum: f64 = rho.iter().chain(std::iter::once(&outside)).map(|r| (1.0 - r) / r).sum();
    (a / (a + 1.0) * sum).sqrt()
}

/// Relative loss of the simulated policy against the deterministic bound
/// for each horizon.
pub fn regret_experiment(
    model: &MarketModel,
    exchange: &dyn Response,
    horizons: &[u64],
    reps: u64,
    seed: u64,
    opts: &SolveOptions,
) -> Result<Vec<RegretRow>> {
    let (solution, policy) = optimal_policy(model, exchange, opts)?;
    let psi = solution.evaluation.objective;
    let k = regret_constant(&model.rho());
    let mut rows = Vec::with_capacity(horizons.len());
    for (i, &n) in horizons.iter().enumerate() {
        let runs = simulate_replications(model, exchange, &policy, n, reps, seed.wrapping_add(i as u64))?;
        let regrets: Vec<f64> = runs.iter().map(|r| 1.0 - r.total_yield / (n as f64 * psi)).collect();
        let (mean, se) = mean_and_standard_error(&regrets);
        rows.push(RegretRow { n, mean_regret: mean, band: 1.96 * se, bound: k / (n as f64).sqrt(), dual_value: psi, reps });
    }
    Ok(rows)
}
