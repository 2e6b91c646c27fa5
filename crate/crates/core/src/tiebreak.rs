//! Tie probabilities at a bid-price vector and the randomized routing rule
//! that splits tied impressions so every contract is met in expectation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exchange::Response;
use crate::flow::{from_units, to_units, FlowNetwork, FLOW_RESOLUTION, INFINITE};
use crate::market::events::{winner_indices, OUTSIDE};
use crate::market::{Active, EventOptions, EventTable, MarketModel, Winners};

/// Largest unmet demand accepted by [`solve_tiebreak_flow`]. Bid prices
/// from a continuous solve balance delivery only to the solver tolerance.
pub const FLOW_TOLERANCE: f64 = 1e-6;

/// Probability that exactly the members of a set attain the best adjusted
/// quality and the exchange rejects the impression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TieTable {
    /// Winner sets with positive mass, ascending by bit pattern.
    pub entries: Vec<(Winners, f64)>,
    /// Probability that the exchange buys the impression.
    pub empty_tie: f64,
    /// Part of each entry's mass the exchange is indifferent to buying:
    /// the reserve sits on a bid atom equal to the opportunity cost.
    pub sellable: Vec<(Winners, f64)>,
}

impl TieTable {
    pub fn from_events(table: &EventTable) -> TieTable {
        let entries: Vec<(Winners, f64)> =
            table.iter().filter(|(_, m)| m.kept > 0.0).map(|(w, m)| (w, m.kept)).collect();
        let kept: f64 = entries.iter().map(|(_, p)| p).sum();
        let sellable = table
            .iter()
            .filter(|(w, m)| w & OUTSIDE == 0 && m.kept - m.kept_strict > 0.0)
            .map(|(w, m)| (w, m.kept - m.kept_strict))
            .collect();
        TieTable { entries, empty_tie: (1.0 - kept).max(0.0), sellable }
    }

    pub fn get(&self, set: Winners) -> f64 {
        self.entries.iter().find(|(w, _)| *w == set).map_or(0.0, |(_, p)| *p)
    }

    /// Entries with at least two members, counting the outside option.
    pub fn multi_member(&self) -> impl Iterator<Item = (Winners, f64)> + '_ {
        self.entries.iter().copied().filter(|(w, _)| w.count_ones() > 1)
    }

    pub fn total(&self) -> f64 {
        self.empty_tie + self.entries.iter().map(|(_, p)| p).sum::<f64>()
    }
}

/// Tie table of the model's yield-weighted qualities at `v`.
pub fn tie_probabilities(model: &MarketModel, response: &dyn Response, v: &[f64], opts: &EventOptions) -> Result<TieTable> {
    let law = model.weighted_law()?;
    let table = law.events(v, &Active::all(model.len()), response, opts)?;
    Ok(TieTable::from_events(&table))
}

/// Flows `y_a(S)` of tied impressions to advertisers and the routing
/// probabilities `I_a(S) = y_a(S) / P(S)` derived from them. Participants
/// are single bits; the outside option is [`OUTSIDE`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TieBreakRule {
    pub flows: BTreeMap<Winners, Vec<(u64, f64)>>,
    pub routing: BTreeMap<Winners, Vec<(u64, f64)>>,
    /// Largest `|sum_S y_a(S) - rho_a|`.
    pub delivery_residual: f64,
    /// Largest `|sum_a y_a(S) - P(S)|`.
    pub supply_residual: f64,
    /// For sets at an exchange kink, the share of the flexible mass that
    /// goes to the exchange under the greatest maximizer.
    pub sell_share: BTreeMap<Winners, f64>,
}

impl TieBreakRule {
    /// A rule built from routing probabilities alone.
    pub fn from_routing(routing: BTreeMap<Winners, Vec<(u64, f64)>>) -> TieBreakRule {
        TieBreakRule { routing, ..TieBreakRule::default() }
    }

    pub fn sold_share(&self, set: Winners) -> f64 {
        self.sell_share.get(&set).copied().unwrap_or(0.0)
    }

    pub fn probability(&self, set: Winners, participant: u64) -> f64 {
        self.routing
            .get(&set)
            .and_then(|r| r.iter().find(|(b, _)| *b == participant))
            .map_or(0.0, |(_, p)| *p)
    }

    /// Routing weights for an impression whose tie set over all
    /// participants is `full`, restricted to the `available` participants
    /// and renormalized. Falls back to uniform weights when no available
    /// participant has routing mass.
    pub fn weights(&self, full: Winners, available: Winners) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = self
            .routing
            .get(&full)
            .map(|r| r.iter().filter(|(b, p)| available & b != 0 && *p > 0.0).copied().collect())
            .unwrap_or_default();
        let total: f64 = out.iter().map(|(_, p)| p).sum();
        if total > 0.0 {
            out.iter_mut().for_each(|(_, p)| *p /= total);
            return out;
        }
        let bits = participants(available);
        let w = 1.0 / bits.len().max(1) as f64;
        bits.into_iter().map(|b| (b, w)).collect()
    }
}

fn participants(set: Winners) -> Vec<u64> {
    let mut bits: Vec<u64> = winner_indices(set & !OUTSIDE).map(|a| 1u64 << a).collect();
    if set & OUTSIDE != 0 {
        bits.push(OUTSIDE);
    }
    bits
}

/// Splits every tie set's mass among its members so that advertiser `a`
/// receives exactly `rho[a]`; the outside option absorbs the rest. Solved
/// as a max-flow from a source through tie sets and advertisers to a sink.
/// Fails with the violated cut when demands cannot be met to
/// `tolerance`.
pub fn solve_tiebreak_flow(table: &TieTable, rho: &[f64], tolerance: f64) -> Result<TieBreakRule> {
    let n = rho.len();
    let sets: Vec<(Winners, f64)> = table.entries.clone();
    let (source, sink) = (0, 1);
    let set_node = |i: usize| 2 + i;
    let adv_node = |a: usize| 2 + sets.len() + a;
    let outside_node = 2 + sets.len() + n;
    let mut g = FlowNetwork::new(outside_node + 1);

    let supply: Vec<i64> = sets.iter().map(|(_, p)| to_units(*p)).collect();
    let demand: Vec<i64> = rho.iter().map(|r| to_units(*r)).collect();
    let total_supply: i64 = supply.iter().sum();
    let total_demand: i64 = demand.iter().sum();
    let slack = (total_supply - total_demand).max(0);

    let mut arcs = Vec::new();
    let mut sell_arcs = Vec::new();
    for (i, (set, _)) in sets.iter().enumerate() {
        g.add_edge(source, set_node(i), supply[i]);
        for b in participants(*set) {
            let node = if b == OUTSIDE { outside_node } else { adv_node(b.trailing_zeros() as usize) };
            arcs.push((i, b, g.add_edge(set_node(i), node, INFINITE)));
        }
        if let Some((_, m)) = table.sellable.iter().find(|(w, _)| w == set) {
            sell_arcs.push((i, *m, g.add_edge(set_node(i), outside_node, to_units(*m))));
        }
    }
    for a in 0..n {
        g.add_edge(adv_node(a), sink, demand[a]);
    }
    g.add_edge(outside_node, sink, slack);

    let result = g.max_flow(source, sink);
    let deficit = from_units(total_demand + slack - result.value);
    if deficit > tolerance {
        let cut: Vec<usize> = (0..n).filter(|&a| demand[a] > 0 && !result.source_side[adv_node(a)]).collect();
        let cut_bits = cut.iter().fold(0u64, |acc, a| acc | (1u64 << a));
        let reaching: f64 = sets.iter().filter(|(w, _)| w & cut_bits != 0).map(|(_, p)| p).sum();
        let needed: f64 = cut.iter().map(|&a| rho[a]).sum();
        return Err(Error::InfeasibleFlow(format!(
            "unmet demand {deficit:.3e}: advertisers at indices {cut:?} need {needed:.12} but tie sets touching them carry {reaching:.12}"
        )));
    }

    let mut flows: BTreeMap<Winners, Vec<(u64, f64)>> = BTreeMap::new();
    let mut delivered = vec![0.0; n];
    for &(i, b, edge) in &arcs {
        let y = from_units(g.flow_on(edge));
        flows.entry(sets[i].0).or_default().push((b, y));
        if b != OUTSIDE {
            delivered[b.trailing_zeros() as usize] += y;
        }
    }
    let delivery_residual = (0..n).map(|a| (delivered[a] - rho[a]).abs()).fold(0.0, f64::max);
    let mut sell_share = BTreeMap::new();
    let mut sold = vec![0.0; sets.len()];
    for &(i, m, edge) in &sell_arcs {
        sold[i] = from_units(g.flow_on(edge));
        if sold[i] > 0.0 {
            sell_share.insert(sets[i].0, (sold[i] / m).min(1.0));
        }
    }
    let mut supply_residual: f64 = 0.0;
    let mut routing = BTreeMap::new();
    for (i, (set, p)) in sets.iter().enumerate() {
        let ys = flows.get(set).cloned().unwrap_or_default();
        let sent: f64 = ys.iter().map(|(_, y)| y).sum();
        supply_residual = supply_residual.max((sent + sold[i] - p).abs());
        let members = participants(*set);
        let route: Vec<(u64, f64)> = if sent > FLOW_RESOLUTION {
            ys.iter().map(|(b, y)| (*b, y / sent)).collect()
        } else {
            members.iter().map(|b| (*b, 1.0 / members.len() as f64)).collect()
        };
        routing.insert(*set, route);
    }
    Ok(TieBreakRule { flows, routing, delivery_residual, supply_residual, sell_share })
}
