use crate::error::{Error, Result};
use crate::exchange::{BidLaw, BidModel, Price, Response};
use crate::market::{MarketModel, QualityLaw};

/// Default cap on `(N + 1) * prod(C_a + 1)`.
pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

/// Exact value function of the horizon problem over states
/// `(impressions left, demand left)`. Contracts are hard constraints:
/// states that cannot meet them are worth minus infinity.
#[derive(Debug, Clone)]
pub struct DpSolution {
    pub value: f64,
    pub horizon: u64,
    pub capacities: Vec<u64>,
    table: Vec<f64>,
    radix: Vec<usize>,
    qualities: Vec<(f64, Vec<f64>)>,
    bids: Vec<(f64, f64)>,
    gamma: f64,
}

/// What the optimal policy does with one impression.
#[derive(Debug, Clone, PartialEq)]
pub struct DpDecision {
    pub reserve: Price,
    /// Advertiser receiving the impression if the exchange passes; `None`
    /// discards it.
    pub assign: Option<usize>,
}

fn bid_atoms(bids: &BidModel) -> Result<Vec<(f64, f64)>> {
    match bids {
        BidModel::Null => Ok(Vec::new()),
        BidModel::SingleBidder { law: BidLaw::Discrete { values, probs } } => {
            Ok(values.iter().copied().zip(probs.iter().copied()).collect())
        }
        _ => Err(Error::Unsupported("the dynamic program needs no exchange or a single bidder with finitely many bids".into())),
    }
}

impl DpSolution {
    fn index(&self, m: u64, x: &[u64]) -> usize {
        let mut k = m as usize;
        for (a, xa) in x.iter().enumerate() {
            k = k * self.radix[a] + *xa as usize;
        }
        k
    }

    /// `J_m(x)`.
    pub fn value_at(&self, m: u64, x: &[u64]) -> f64 {
        if m > self.horizon || x.iter().zip(&self.capacities).any(|(a, c)| a > c) {
            return f64::NEG_INFINITY;
        }
        self.table[self.index(m, x)]
    }

    /// Best reserve and fallback assignment at state `(m, x)` for an
    /// impression of unweighted quality `q`.
    pub fn decide(&self, m: u64, x: &[u64], q: &[f64]) -> DpDecision {
        let (reserve, _, assign) = self.stage(m, x, q);
        DpDecision { reserve, assign }
    }

    /// Expected value of one impression at `(m, x)` given its quality:
    /// returns the best reserve, its value and the fallback assignment.
    fn stage(&self, m: u64, x: &[u64], q: &[f64]) -> (Price, f64, Option<usize>) {
        let keep = self.value_at(m - 1, x);
        let mut fallback = keep;
        let mut assign = None;
        let mut y = x.to_vec();
        for a in 0..x.len() {
            if x[a] == 0 {
                continue;
            }
            y[a] -= 1;
            let w = self.gamma * q[a] + self.value_at(m - 1, &y);
            y[a] += 1;
            if w > fallback {
                fallback = w;
                assign = Some(a);
            }
        }
        let mut best = (Price::RejectAll, fallback);
        if keep.is_finite() {
            for &(p, _) in &self.bids {
                let s: f64 = self.bids.iter().filter(|(b, _)| *b >= p).map(|(_, w)| w).sum();
                let value = s * (p + keep) + (1.0 - s) * fallback;
                if value > best.1 {
                    best = (Price::Finite(p), value);
                }
            }
        }
        (best.0, best.1, assign)
    }
}

/// Backward induction over all states for a model with finitely many
/// quality atoms and an exchange with finitely many bid levels. Reserves
/// range over the bid levels and reject-all.
pub fn dp_solve(model: &MarketModel, bids: &BidModel, horizon: u64, capacities: &[u64], budget: usize) -> Result<DpSolution> {
    let QualityLaw::Atoms(atoms) = &model.law else {
        return Err(Error::Unsupported("the dynamic program needs a quality law with finitely many atoms".into()));
    };
    if capacities.len() != model.len() {
        return Err(Error::Config("one capacity per advertiser is required".into()));
    }
    let committed: u64 = capacities.iter().sum();
    if committed > horizon {
        return Err(Error::InfeasibleHorizon { horizon: horizon as usize, committed: committed as usize });
    }
    let radix: Vec<usize> = capacities.iter().map(|c| *c as usize + 1).collect();
    let per_stage = radix.iter().try_fold(1usize, |acc, r| acc.checked_mul(*r));
    let states = per_stage.and_then(|p| p.checked_mul(horizon as usize + 1)).unwrap_or(usize::MAX);
    if states > budget {
        return Err(Error::StateBudget { states, budget });
    }
    let per_stage = per_stage.unwrap_or(usize::MAX);
    let mut sol = DpSolution {
        value: 0.0,
        horizon,
        capacities: capacities.to_vec(),
        table: vec![f64::NEG_INFINITY; states],
        radix: radix.clone(),
        qualities: atoms.iter().map(|(p, q)| (p, q.to_vec())).collect(),
        bids: bid_atoms(bids)?,
        gamma: model.gamma,
    };
    sol.table[0] = 0.0;
    let mut x = vec![0u64; capacities.len()];
    for m in 1..=horizon {
        for flat in 0..per_stage {
            let mut rest = flat;
            for a in (0..x.len()).rev() {
                x[a] = (rest % radix[a]) as u64;
                rest /= radix[a];
            }
            if x.iter().sum::<u64>() > m {
                continue;
            }
            let mut total = 0.0;
            for (p, q) in &sol.qualities {
                if *p > 0.0 {
                    total += p * sol.stage(m, &x, q).1;
                }
            }
            let k = sol.index(m, &x);
            sol.table[k] = total;
        }
    }
    sol.value = sol.value_at(horizon, capacities);
    Ok(sol)
}

/// `N psi(v)`, the deterministic approximation's value over `N`
/// impressions at bid prices `v`.
pub fn dap_upper_bound(model: &MarketModel, response: &dyn Response, v: &[f64], horizon: u64) -> Result<f64> {
    if horizon == 0 {
        return Ok(0.0);
    }
    Ok(horizon as f64 * crate::dual::dual_objective(model, response, v)?)
}
