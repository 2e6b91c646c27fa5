//! Expectations of the exchange response split by the set of maximizers of
//! the contract-adjusted quality.

use std::collections::BTreeMap;

use crate::exchange::ExchangeResponse;

/// Set of maximizers: bit `i` is advertiser index `i`, [`OUTSIDE`] is the
/// outside option.
pub type Winners = u64;

pub const OUTSIDE: Winners = 1 << 63;

/// Largest number of advertisers a bitmask can hold.
pub const MAX_ADVERTISERS: usize = 63;

/// Adjusted qualities within this distance of the maximum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

pub fn winner_count(w: Winners) -> u32 {
    w.count_ones()
}

/// Advertiser indices in a winner set (the outside option excluded).
pub fn winner_indices(w: Winners) -> impl Iterator<Item = usize> {
    (0..MAX_ADVERTISERS).filter(move |i| w & (1u64 << i) != 0)
}

/// Which advertisers (and whether the outside option) can still receive
/// impressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Active {
    pub advertisers: u64,
    pub outside: bool,
}

impl Active {
    pub fn all(count: usize) -> Active {
        let advertisers = if count >= 64 { u64::MAX } else { (1u64 << count) - 1 };
        Active { advertisers: advertisers & !OUTSIDE, outside: true }
    }

    pub fn contains(&self, a: usize) -> bool {
        self.advertisers & (1u64 << a) != 0
    }

    pub fn without(self, a: usize) -> Active {
        Active { advertisers: self.advertisers & !(1u64 << a), ..self }
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        winner_indices(self.advertisers)
    }
}

/// Expectations accumulated over one winner set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EventMass {
    /// `E[R(lambda) 1{S}]`.
    pub value: f64,
    /// `E[(1 - s*) 1{S}]` with the least maximizer: probability that the
    /// impression reaches the set.
    pub kept: f64,
    /// Same with the greatest maximizer.
    pub kept_strict: f64,
    /// `E[r(s*) 1{S}]`.
    pub revenue: f64,
    /// Same with the greatest maximizer.
    pub revenue_strict: f64,
}

impl EventMass {
    pub fn from_response(r: &ExchangeResponse, weight: f64) -> EventMass {
        EventMass {
            value: weight * r.value,
            kept: weight * (1.0 - r.survival),
            kept_strict: weight * (1.0 - r.survival_max),
            revenue: weight * r.revenue,
            revenue_strict: weight * strict_revenue(r),
        }
    }

    pub fn from_array(x: [f64; 4]) -> EventMass {
        EventMass { value: x[0], kept: x[1], kept_strict: x[2], revenue: x[3], revenue_strict: x[3] }
    }

    pub fn add(&mut self, other: &EventMass) {
        self.value += other.value;
        self.kept += other.kept;
        self.kept_strict += other.kept_strict;
        self.revenue += other.revenue;
        self.revenue_strict += other.revenue_strict;
    }

    pub fn scaled(&self, w: f64) -> EventMass {
        EventMass {
            value: w * self.value,
            kept: w * self.kept,
            kept_strict: w * self.kept_strict,
            revenue: w * self.revenue,
            revenue_strict: w * self.revenue_strict,
        }
    }

    /// Masses when a share `theta` of the flexible part `kept - kept_strict`
    /// is sold instead of kept.
    pub fn with_sold_share(&self, theta: f64) -> EventMass {
        EventMass {
            kept: self.kept - theta * (self.kept - self.kept_strict),
            revenue: self.revenue + theta * (self.revenue_strict - self.revenue),
            ..*self
        }
    }
}

// Both maximizers share the value R(c) = r(s) + (1 - s) c, which recovers
// the revenue at the greatest one without the opportunity cost.
fn strict_revenue(r: &ExchangeResponse) -> f64 {
    if r.survival_max > r.survival && r.survival < 1.0 {
        r.value - (1.0 - r.survival_max) * (r.value - r.revenue) / (1.0 - r.survival)
    } else {
        r.revenue
    }
}

/// Event masses keyed by winner set, in increasing key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventTable {
    entries: BTreeMap<Winners, EventMass>,
}

impl EventTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, winners: Winners, mass: EventMass) {
        self.entries.entry(winners).or_default().add(&mass);
    }

    pub fn merge(&mut self, other: &EventTable, weight: f64) {
        for (w, m) in &other.entries {
            self.add(*w, m.scaled(weight));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Winners, &EventMass)> {
        self.entries.iter().map(|(w, m)| (*w, m))
    }

    pub fn get(&self, winners: Winners) -> EventMass {
        self.entries.get(&winners).copied().unwrap_or_default()
    }

    /// `E[R(lambda)]`.
    pub fn expected_value(&self) -> f64 {
        self.entries.values().map(|m| m.value).sum()
    }

    pub fn expected_revenue(&self) -> f64 {
        self.entries.values().map(|m| m.revenue).sum()
    }

    /// Total probability mass that is not sold (the sum of all tie masses).
    pub fn kept_total(&self) -> f64 {
        self.entries.values().map(|m| m.kept).sum()
    }

    /// Probability mass routed only to advertisers in `set` when their bid
    /// prices rise.
    pub fn kept_strict_within(&self, set: u64) -> f64 {
        self.entries.iter().filter(|(w, _)| **w & !set == 0).map(|(_, m)| m.kept_strict).sum()
    }

    /// Probability mass of events touching `set`.
    pub fn kept_touching(&self, set: u64) -> f64 {
        self.entries.iter().filter(|(w, _)| **w & set != 0).map(|(_, m)| m.kept).sum()
    }

    /// Winner sets with more than one member.
    pub fn ties(&self) -> impl Iterator<Item = (Winners, &EventMass)> {
        self.iter().filter(|(w, _)| winner_count(*w) > 1)
    }
}

/// Winner set for one realization of adjusted qualities; `adjusted[a]` is
/// ignored for inactive advertisers. Returns the maximum and its winners.
pub fn argmax_set(adjusted: &[f64], active: &Active) -> (f64, Winners) {
    let mut best = if active.outside { 0.0 } else { f64::NEG_INFINITY };
    for a in active.indices() {
        best = best.max(adjusted[a]);
    }
    let mut winners = 0;
    if active.outside && best - TIE_TOLERANCE <= 0.0 {
        winners |= OUTSIDE;
    }
    for a in active.indices() {
        if adjusted[a] >= best - TIE_TOLERANCE {
            winners |= 1u64 << a;
        }
    }
    (best, winners)
}
