use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::Response;
use crate::market::events::{argmax_set, OUTSIDE};
use crate::market::{Active, MarketModel};
use crate::tiebreak::TieBreakRule;

/// Bid prices and tie routing for the static bid-price policy. Bid prices
/// are in yield units, i.e. against `gamma * Q`.
#[derive(Debug, Clone, Default)]
pub struct PolicyConfig {
    pub v: Vec<f64>,
    pub tiebreak: TieBreakRule,
}

/// One simulated horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub rep: u64,
    pub seed: u64,
    pub impressions: u64,
    #[serde(rename = "yield")]
    pub total_yield: f64,
    pub adx_revenue: f64,
    /// Unweighted quality delivered to each advertiser.
    pub quality: Vec<f64>,
    pub delivered: Vec<u64>,
    pub capacities: Vec<u64>,
    /// Impressions processed before the first contract filled or every
    /// remaining impression became committed.
    pub leftover_onset: u64,
    pub sold: u64,
}

/// `C_a = floor(rho_a N)` plus one extra impression for the largest
/// remainders until the total reaches `round(N sum rho)`, capped at `N`.
pub fn capacities(rho: &[f64], n: u64) -> Vec<u64> {
    let exact: Vec<f64> = rho.iter().map(|r| r * n as f64).collect();
    let mut c: Vec<u64> = exact.iter().map(|x| (x + 1e-9).floor().max(0.0) as u64).collect();
    let target = ((exact.iter().sum::<f64>()).round() as u64).min(n);
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - c[a] as f64;
        let fb = exact[b] - c[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut total: u64 = c.iter().sum();
    for &a in order.iter().cycle().take(rho.len() * 2) {
        if total >= target {
            break;
        }
        if exact[a] - c[a] as f64 > 1e-9 {
            c[a] += 1;
            total += 1;
        }
    }
    c
}

/// The random stream of replication `rep`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Simulates one horizon of `n` impressions with capacities rounded from
/// the model's shares.
pub fn simulate_policy(
    model: &MarketModel,
    response: &dyn Response,
    config: &PolicyConfig,
    n: u64,
    seed: u64,
    rep: u64,
) -> Result<SimOutcome> {
    let caps = capacities(&model.rho(), n);
    let mut rng = replication_rng(seed, rep);
    let mut out = simulate_with_capacities(model, response, config, &caps, n, &mut rng)?;
    out.seed = seed;
    out.rep = rep;
    Ok(out)
}

/// Independent replications on counter-indexed streams, in parallel.
pub fn simulate_replications(
    model: &MarketModel,
    response: &dyn Response,
    config: &PolicyConfig,
    n: u64,
    reps: u64,
    seed: u64,
) -> Result<Vec<SimOutcome>> {
    (0..reps).into_par_iter().map(|rep| simulate_policy(model, response, config, n, seed, rep)).collect()
}

fn pick(weights: &[(u64, f64)], rng: &mut dyn RngCore) -> u64 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(b, w) in weights {
        acc += w;
        if u < acc {
            return b;
        }
    }
    weights.last().map(|(b, _)| *b).unwrap_or(OUTSIDE)
}

/// The policy's state machine over one horizon. Each impression goes to the
/// best contract-adjusted quality among unfilled advertisers and the outside
/// option, after the exchange has had its chance at the matching reserve.
/// When every remaining impression is committed the exchange is skipped and
/// the outside option leaves.
pub fn simulate_with_capacities(
    model: &MarketModel,
    response: &dyn Response,
    config: &PolicyConfig,
    caps: &[u64],
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<SimOutcome> {
    let k = model.len();
    if config.v.len() != k || caps.len() != k {
        return Err(Error::Config(format!("policy has {} bid prices and {} capacities for {k} advertisers", config.v.len(), caps.len())));
    }
    let committed: u64 = caps.iter().sum();
    if committed > n {
        return Err(Error::InfeasibleHorizon { horizon: n as usize, committed: committed as usize });
    }
    let gamma = model.gamma;
    let mut x = caps.to_vec();
    let mut outstanding = committed;
    let mut quality = vec![0.0; k];
    let mut revenue = 0.0;
    let mut sold = 0;
    let mut onset: Option<u64> = None;
    let mut adjusted = vec![0.0; k];
    let everyone = Active::all(k);
    for i in 0..n {
        let remaining = n - i;
        if onset.is_none() && (outstanding == remaining || (0..k).any(|a| caps[a] > 0 && x[a] == 0)) {
            onset = Some(i);
        }
        let q = model.law.sample(rng).values;
        for a in 0..k {
            adjusted[a] = gamma * q[a] - config.v[a];
        }
        let unfilled = (0..k).filter(|&a| x[a] > 0).fold(0u64, |acc, a| acc | (1u64 << a));
        let forced = outstanding == remaining;
        let available = Active { advertisers: unfilled, outside: !forced };
        let (lambda, winners) = argmax_set(&adjusted, &available);
        if winners == 0 {
            continue;
        }
        let (_, full) = argmax_set(&adjusted, &everyone);
        if !forced {
            let mut r = response.respond(lambda);
            if r.survival_max > r.survival {
                let theta = config.tiebreak.sold_share(full);
                if theta > 0.0 && rng.gen::<f64>() < theta {
                    r = response.respond_greatest(lambda);
                }
            }
            if let Some(pay) = response.sell(&r, rng) {
                revenue += pay;
                sold += 1;
                continue;
            }
        }
        let chosen = if winners.count_ones() == 1 {
            winners
        } else {
            pick(&config.tiebreak.weights(full, winners), rng)
        };
        if chosen != OUTSIDE {
            let a = chosen.trailing_zeros() as usize;
            x[a] -= 1;
            outstanding -= 1;
            quality[a] += q[a];
        }
    }
    let adx_revenue = revenue;
    let total_yield = adx_revenue + gamma * quality.iter().sum::<f64>();
    Ok(SimOutcome {
        rep: 0,
        seed: 0,
        impressions: n,
        total_yield,
        adx_revenue,
        quality,
        delivered: caps.iter().zip(&x).map(|(c, r)| c - r).collect(),
        capacities: caps.to_vec(),
        leftover_onset: onset.unwrap_or(n),
        sold,
    })
}

/// Mean and standard error of the per-impression yield.
pub fn yield_per_impression(outcomes: &[SimOutcome]) -> (f64, f64) {
    let xs: Vec<f64> = outcomes.iter().map(|o| o.total_yield / o.impressions.max(1) as f64).collect();
    mean_and_standard_error(&xs)
}

pub fn mean_and_standard_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::RevenueCurve;
    use crate::market::{Advertiser, Marginal, QualityLaw};

    fn uniform() -> MarketModel {
        let advs = vec![Advertiser { id: 1, rho: 0.5, penalty: 0.0, quality_floor: None }];
        MarketModel::new(advs, QualityLaw::Independent(vec![Marginal::Uniform { low: 0.0, high: 1.0 }]), 1.0).unwrap()
    }

    #[test]
    fn largest_remainder_rounding() {
        assert_eq!(capacities(&[0.5], 11), vec![6]);
        assert_eq!(capacities(&[0.9, 0.1], 10), vec![9, 1]);
        assert_eq!(capacities(&[0.25, 0.3, 0.2], 10), vec![3, 3, 2]);
        assert_eq!(capacities(&[1.0 / 3.0; 3], 10), vec![4, 3, 3]);
        assert_eq!(capacities(&[0.5, 0.5], 7), vec![4, 3]);
    }

    #[test]
    fn zero_slack_skips_the_exchange() {
        let m = uniform().with_rho(&[1.0]).unwrap();
        let curve = RevenueCurve::build(&crate::exchange::BidModel::SingleBidder { law: crate::exchange::BidLaw::Uniform { low: 0.0, high: 1.0 } }, 100).unwrap();
        let cfg = PolicyConfig { v: vec![0.0], ..Default::default() };
        let o = simulate_policy(&m, &curve, &cfg, 200, 1, 0).unwrap();
        assert_eq!(o.adx_revenue, 0.0);
        assert_eq!(o.delivered, vec![200]);
        assert_eq!(o.leftover_onset, 0);
    }

    #[test]
    fn delivers_exactly() {
        let cfg = PolicyConfig { v: vec![0.5], ..Default::default() };
        for rep in 0..50 {
            let o = simulate_policy(&uniform(), &RevenueCurve::null(), &cfg, 101, 9, rep).unwrap();
            assert_eq!(o.delivered, o.capacities);
        }
    }

    #[test]
    fn horizon_shorter_than_commitments() {
        let cfg = PolicyConfig { v: vec![0.5], ..Default::default() };
        let mut rng = replication_rng(0, 0);
        let e = simulate_with_capacities(&uniform(), &RevenueCurve::null(), &cfg, &[5], 4, &mut rng).unwrap_err();
        assert!(matches!(e, Error::InfeasibleHorizon { horizon: 4, committed: 5 }));
    }
}
