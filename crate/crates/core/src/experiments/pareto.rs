use serde::{Deserialize, Serialize};

use crate::dual::SolveOptions;
use crate::error::Result;
use crate::exchange::{RemnantOnly, Response, RevenueCurve};
use crate::fluid::fluid_evaluate;
use crate::market::MarketModel;
use crate::policy::optimal_policy;

/// Quality weight used in place of zero, where every adjusted quality
/// would tie.
pub const SMALLEST_GAMMA: f64 = 1e-6;

/// One point of the revenue/quality trade-off, per impression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    /// `f64::INFINITY` for the remnant-only baseline.
    pub gamma: f64,
    pub quality: f64,
    pub revenue: f64,
    /// `revenue + gamma * quality`; absent for the remnant-only baseline.
    #[serde(rename = "yield")]
    pub yield_value: Option<f64>,
}

/// Fluid value of the optimal policy at every quality weight in the grid,
/// plus the `gamma = 0` anchor and the remnant-only baseline that solves
/// without the exchange and sells only what no contract takes.
pub fn pareto_sweep(model: &MarketModel, exchange: &dyn Response, gammas: &[f64], opts: &SolveOptions) -> Result<Vec<FrontierPoint>> {
    let mut grid: Vec<f64> = gammas.iter().copied().filter(|g| g.is_finite()).collect();
    if !grid.contains(&0.0) {
        grid.push(0.0);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut points = Vec::with_capacity(grid.len() + 1);
    for &gamma in &grid {
        let weighted = model.with_gamma(gamma.max(SMALLEST_GAMMA));
        let (_, policy) = optimal_policy(&weighted, exchange, opts)?;
        let f = fluid_evaluate(&weighted, exchange, &policy, &opts.events)?;
        let quality: f64 = f.quality.iter().sum();
        log::info!("gamma {gamma}: quality {quality} revenue {}", f.adx_revenue);
        points.push(FrontierPoint { gamma, quality, revenue: f.adx_revenue, yield_value: Some(f.adx_revenue + gamma * quality) });
    }
    points.push(remnant_baseline(model, exchange, opts)?);
    Ok(points)
}

/// Contracts first: bid prices from the problem without an exchange, and
/// the exchange sees only impressions the contracts pass on, at the
/// reserve that is optimal for zero opportunity cost.
pub fn remnant_baseline(model: &MarketModel, exchange: &dyn Response, opts: &SolveOptions) -> Result<FrontierPoint> {
    let raw = model.with_gamma(1.0);
    let (_, policy) = optimal_policy(&raw, &RevenueCurve::null(), opts)?;
    let remnant = RemnantOnly::new(exchange);
    let f = fluid_evaluate(&raw, &remnant, &policy, &opts.events)?;
    Ok(FrontierPoint { gamma: f64::INFINITY, quality: f.quality.iter().sum(), revenue: f.adx_revenue, yield_value: None })
}
