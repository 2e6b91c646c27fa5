#![allow(dead_code)]

use std::path::Path;

use adyield::config::{Exchange, ModelConfig};
use adyield::exchange::{BidLaw, BidModel, RevenueCurve, DEFAULT_GRID_POINTS};
use adyield::market::{Advertiser, Atoms, Marginal, MarketModel, Mixture, MixtureType, QualityLaw};
use rand::Rng;

pub fn fixture(name: &str) -> (MarketModel, Exchange, ModelConfig) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    let config = ModelConfig::load(&path).expect("fixture loads");
    let model = config.market().expect("fixture model");
    let exchange = Exchange::new(config.curve().expect("fixture curve"), config.revenue_share).expect("fixture exchange");
    (model, exchange, config)
}

pub fn curve(model: &BidModel) -> RevenueCurve {
    RevenueCurve::build(model, DEFAULT_GRID_POINTS).expect("curve builds")
}

pub fn advertisers(rho: &[f64], penalty: f64) -> Vec<Advertiser> {
    rho.iter().enumerate().map(|(i, r)| Advertiser { id: i as u32 + 1, rho: *r, penalty, quality_floor: None }).collect()
}

/// Shares summing to at most `total`, each at least `floor`.
pub fn random_rho<R: Rng>(rng: &mut R, count: usize, total: f64, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..count).map(|_| rng.gen_range(0.2..1.0)).collect();
    let scale = rng.gen_range(0.5..1.0) * total / w.iter().sum::<f64>();
    w.iter().map(|x| (x * scale).max(floor)).collect()
}

pub fn random_bid_model<R: Rng>(rng: &mut R) -> BidModel {
    match rng.gen_range(0..6) {
        0 => {
            let low = rng.gen_range(0.0..1.0);
            BidModel::SingleBidder { law: BidLaw::Uniform { low, high: low + rng.gen_range(0.2..3.0) } }
        }
        1 => BidModel::SingleBidder { law: BidLaw::Exponential { rate: rng.gen_range(0.3..4.0) } },
        2 => BidModel::SingleBidder { law: BidLaw::LogNormal { mu: rng.gen_range(-1.0..1.0), sigma: rng.gen_range(0.2..1.0) } },
        3 => {
            let k = rng.gen_range(1..=4);
            let mut values: Vec<f64> = (0..k).map(|_| (rng.gen_range(0.05..3.0) * 100.0f64).round() / 100.0).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            let w: Vec<f64> = values.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = w.iter().sum();
            BidModel::SingleBidder { law: BidLaw::Discrete { values, probs: w.iter().map(|x| x / s).collect() } }
        }
        4 => BidModel::SecondPrice { law: BidLaw::Uniform { low: 0.0, high: rng.gen_range(0.5..2.0) }, bidders: rng.gen_range(2..=4) },
        _ => BidModel::SecondPrice { law: BidLaw::Exponential { rate: rng.gen_range(0.5..3.0) }, bidders: rng.gen_range(2..=3) },
    }
}

/// Log-normal type mixture with qualities of order one. Every advertiser
/// belongs to at least one type and no two types share a member set, so
/// `types` is capped at the number of nonempty subsets.
pub fn random_mixture<R: Rng>(rng: &mut R, advertisers: usize, types: usize) -> Mixture {
    let types = types.min((1usize << advertisers) - 1);
    let mut out = Vec::with_capacity(types);
    let mut used: Vec<Vec<usize>> = Vec::new();
    let mut probs: Vec<f64> = (0..types).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    for (t, p) in probs.iter().enumerate() {
        let members = loop {
            let mut m: Vec<usize> = (0..advertisers).filter(|_| rng.gen_bool(0.6)).collect();
            if t < advertisers && !m.contains(&t) {
                m.push(t);
                m.sort_unstable();
            }
            if !m.is_empty() && !used.contains(&m) {
                break m;
            }
        };
        used.push(members.clone());
        let d = members.len();
        let mean: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.6..0.4)).collect();
        let sd: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..0.7)).collect();
        let corr = rng.gen_range(-0.3..0.6);
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] = sd[i] * sd[j] * if i == j { 1.0 } else { corr };
            }
        }
        out.push(MixtureType::new(members, *p, mean, cov).expect("valid type"));
    }
    let penalties = (0..advertisers).map(|_| rng.gen_range(0.1..1.0)).collect();
    Mixture::new(out, penalties).expect("valid mixture")
}

/// Atoms on a 0.1 grid, so ties between advertisers carry mass.
pub fn random_atoms<R: Rng>(rng: &mut R, advertisers: usize, atoms: usize) -> Atoms {
    let values: Vec<Vec<f64>> =
        (0..atoms).map(|_| (0..advertisers).map(|_| rng.gen_range(0..=10) as f64 / 10.0).collect()).collect();
    let w: Vec<f64> = (0..atoms).map(|_| rng.gen_range(1..=4) as f64).collect();
    let s: f64 = w.iter().sum();
    Atoms::new(w.iter().map(|x| x / s).collect(), values).expect("valid atoms")
}

pub fn random_marginal<R: Rng>(rng: &mut R) -> Marginal {
    match rng.gen_range(0..3) {
        0 => Marginal::Uniform { low: 0.0, high: rng.gen_range(0.5..2.0) },
        1 => Marginal::Exponential { rate: rng.gen_range(0.5..3.0) },
        _ => Marginal::LogNormal { mu: rng.gen_range(-0.5..0.5), sigma: rng.gen_range(0.2..0.8) },
    }
}

pub fn model(rho: &[f64], penalty: f64, law: QualityLaw) -> MarketModel {
    MarketModel::new(advertisers(rho, penalty), law, 1.0).expect("valid model")
}
