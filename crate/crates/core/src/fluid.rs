//! Deterministic large-horizon trajectory of the bid-price policy: service
//! rates are constant between the epochs at which contracts fill.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exchange::{Bypass, Response};
use crate::market::events::{winner_indices, OUTSIDE};
use crate::market::{Active, EventOptions, MarketModel};
use crate::policy::PolicyConfig;

/// Remaining demand below this counts as met.
const FILL_TOLERANCE: f64 = 1e-12;

/// One stretch of constant rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidPiece {
    pub start: f64,
    pub end: f64,
    /// Advertisers still being served.
    pub active: Vec<usize>,
    /// Whether impressions may still go unassigned (sold or discarded).
    pub outside: bool,
    /// Delivery rate per advertiser.
    pub rates: Vec<f64>,
    /// Rate of impressions not given to any advertiser.
    pub outside_rate: f64,
    pub yield_rate: f64,
    pub revenue_rate: f64,
    /// Unweighted quality rate per advertiser.
    pub quality_rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidSolution {
    pub pieces: Vec<FluidPiece>,
    /// Share of the horizon delivered to each advertiser, `S_a(1)`.
    pub served: Vec<f64>,
    /// `J(1)` per impression.
    pub total_yield: f64,
    pub adx_revenue: f64,
    /// Unweighted quality per impression delivered to each advertiser.
    pub quality: Vec<f64>,
    pub gamma: f64,
    /// Advertisers whose demand is still open at the end of the horizon.
    pub unmet: Vec<usize>,
}

impl FluidSolution {
    /// Epoch boundaries with cumulative deliveries and yield.
    pub fn trajectory(&self) -> Vec<(f64, Vec<f64>, f64)> {
        let n = self.served.len();
        let mut s = vec![0.0; n];
        let mut j = 0.0;
        let mut out = vec![(0.0, s.clone(), 0.0)];
        for p in &self.pieces {
            let dt = p.end - p.start;
            for a in 0..n {
                s[a] += p.rates[a] * dt;
            }
            j += p.yield_rate * dt;
            out.push((p.end, s.clone(), j));
        }
        out
    }

    /// CSV with columns `t, S_<id>..., J`.
    pub fn write_trajectory<W: Write>(&self, ids: &[u32], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(ids.iter().map(|id| format!("S_{id}")));
        header.push("J".into());
        w.write_record(&header)?;
        for (t, s, j) in self.trajectory() {
            let mut row = vec![t.to_string()];
            row.extend(s.iter().map(|x| x.to_string()));
            row.push(j.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Follows the fluid trajectory of the policy with bid prices `config.v`
/// (yield units) from `t = 0` to `t = 1`. On each piece the restricted
/// event table gives delivery rates, with tied mass split by the policy's
/// routing rule. Advertisers leave when their share fills; once the
/// unassigned share `1 - sum rho` is used up, the exchange is skipped and
/// every impression goes to a contract.
pub fn fluid_evaluate(model: &MarketModel, response: &dyn Response, config: &PolicyConfig, opts: &EventOptions) -> Result<FluidSolution> {
    let n = model.len();
    let law = model.weighted_law()?;
    let rho = model.rho();
    let rho_outside = model.outside_rho();
    let gamma = model.gamma;
    let v = &config.v;

    let mut served = vec![0.0; n];
    let mut outside_used = 0.0;
    let mut active = Active::all(n);
    for a in 0..n {
        if rho[a] <= 0.0 {
            active = active.without(a);
        }
    }
    active.outside = rho_outside > FILL_TOLERANCE;
    let mut t = 0.0;
    let mut pieces = Vec::new();
    let (mut total_yield, mut adx_revenue) = (0.0, 0.0);
    let mut quality = vec![0.0; n];

    while t < 1.0 - FILL_TOLERANCE {
        let exchange: &dyn Response = if active.outside { response } else { &Bypass };
        let table = law.events(v, &active, exchange, opts)?;
        let mut rates = vec![0.0; n];
        let mut quality_rates = vec![0.0; n];
        let mut revenue_rate = 0.0;
        let mut yield_rate = 0.0;
        for (set, m) in table.iter() {
            let m = &m.with_sold_share(config.tiebreak.sold_share(set));
            revenue_rate += m.revenue;
            yield_rate += m.revenue;
            let weights = if winner_indices(set & !OUTSIDE).count() + usize::from(set & OUTSIDE != 0) > 1 {
                config.tiebreak.weights(set, set)
            } else {
                vec![(set, 1.0)]
            };
            for (bit, w) in weights {
                if bit == OUTSIDE {
                    continue;
                }
                let a = bit.trailing_zeros() as usize;
                rates[a] += w * m.kept;
                let weighted_quality = w * (m.value - m.revenue + v[a] * m.kept);
                yield_rate += weighted_quality;
                if gamma > 0.0 {
                    quality_rates[a] += weighted_quality / gamma;
                }
            }
        }
        let delivered: f64 = rates.iter().sum();
        let outside_rate = (1.0 - delivered).max(0.0);

        let mut dt = 1.0 - t;
        for a in active.indices() {
            if rates[a] > 0.0 {
                dt = dt.min((rho[a] - served[a]) / rates[a]);
            }
        }
        if active.outside && outside_rate > 0.0 {
            dt = dt.min((rho_outside - outside_used) / outside_rate);
        }
        let dt = dt.max(0.0);
        pieces.push(FluidPiece {
            start: t,
            end: t + dt,
            active: active.indices().collect(),
            outside: active.outside,
            rates: rates.clone(),
            outside_rate,
            yield_rate,
            revenue_rate,
            quality_rates: quality_rates.clone(),
        });
        for a in 0..n {
            served[a] += rates[a] * dt;
            quality[a] += quality_rates[a] * dt;
        }
        outside_used += outside_rate * dt;
        total_yield += yield_rate * dt;
        adx_revenue += revenue_rate * dt;
        t += dt;

        let before = active;
        for a in before.indices() {
            if rho[a] - served[a] <= FILL_TOLERANCE * rho[a].max(1.0) {
                served[a] = rho[a];
                active = active.without(a);
            }
        }
        if active.outside && rho_outside - outside_used <= FILL_TOLERANCE {
            active.outside = false;
        }
        if active == before && dt <= FILL_TOLERANCE {
            // nothing fills any more: the last piece runs to the end
            if let Some(last) = pieces.last_mut() {
                let rest = 1.0 - t;
                last.end = 1.0;
                for a in 0..n {
                    served[a] += last.rates[a] * rest;
                    quality[a] += last.quality_rates[a] * rest;
                }
                total_yield += last.yield_rate * rest;
                adx_revenue += last.revenue_rate * rest;
            }
            break;
        }
        if active.advertisers == 0 && !active.outside {
            break;
        }
    }
    pieces.retain(|p| p.end > p.start);
    let unmet = (0..n).filter(|&a| rho[a] - served[a] > 1e-9).collect();
    Ok(FluidSolution { pieces, served, total_yield, adx_revenue, quality, gamma, unmet })
}
