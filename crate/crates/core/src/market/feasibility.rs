use serde::Serialize;

use super::model::{MarketModel, QualityLaw};
use crate::error::{Error, Result};
use crate::flow::{from_units, to_units, FlowNetwork, INFINITE};

/// Outcome of [`check_type_feasibility`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_flow: f64,
    pub demand: f64,
    /// Ids of advertisers on the sink side of a minimum cut: together they
    /// demand more than their types supply. Empty when feasible.
    pub bottleneck: Vec<u32>,
    /// Whether a given bound on qualities and exchange bids stays below
    /// `min_a penalty_a / A`; `None` when no bound was supplied.
    pub penalty_bound_holds: Option<bool>,
}

/// Checks that the types can supply every advertiser's share through the
/// type-advertiser membership graph.
pub fn check_type_feasibility(model: &MarketModel, quality_bound: Option<f64>) -> Result<FeasibilityReport> {
    let QualityLaw::Mixture(mixture) = &model.law else {
        return Err(Error::Unsupported("type feasibility needs a mixture of user types".into()));
    };
    let types = mixture.types();
    let a = model.len();
    // nodes: source, types, advertisers, sink
    let source = 0;
    let sink = 1 + types.len() + a;
    let mut g = FlowNetwork::new(sink + 1);
    for (ti, t) in types.iter().enumerate() {
        g.add_edge(source, 1 + ti, to_units(t.probability));
        for &m in &t.members {
            g.add_edge(1 + ti, 1 + types.len() + m, INFINITE);
        }
    }
    let mut demand_units = 0;
    for (i, adv) in model.advertisers.iter().enumerate() {
        let d = to_units(adv.rho);
        demand_units += d;
        g.add_edge(1 + types.len() + i, sink, d);
    }
    let flow = g.max_flow(source, sink);
    let feasible = flow.value >= demand_units;
    let bottleneck = if feasible {
        Vec::new()
    } else {
        (0..a)
            .filter(|&i| model.advertisers[i].rho > 0.0 && !flow.source_side[1 + types.len() + i]).map(|i| model.advertisers[i].id).collect()
    };
    let penalty_bound_holds = quality_bound.map(|q| {
        let min_penalty = model.advertisers.iter().map(|x| x.penalty).fold(f64::INFINITY, f64::min);
        a == 0 || q <= min_penalty / a as f64
    });
    Ok(FeasibilityReport {
        feasible,
        max_flow: from_units(flow.value),
        demand: from_units(demand_units),
        bottleneck,
        penalty_bound_holds,
    })
}
