use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::normal;
use crate::numeric::{integrate_scalar, Tolerance};

/// Highest and second-highest bid observed for one auction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidSample {
    pub highest: f64,
    pub second_highest: f64,
}

impl BidSample {
    pub fn new(highest: f64, second_highest: f64) -> Result<Self> {
        if !(second_highest >= 0.0 && highest >= second_highest && highest.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "bid pair ({highest}, {second_highest}) must satisfy b1 >= b2 >= 0"
            )));
        }
        Ok(BidSample { highest, second_highest })
    }
}

/// Distribution of a single bidder's value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BidLaw {
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    /// Finitely many bid levels; `values` strictly increasing.
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

impl BidLaw {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match self {
            BidLaw::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && *low >= 0.0 && high > low) {
                    return bad(format!("uniform bid law needs 0 <= low < high, got [{low}, {high}]"));
                }
            }
            BidLaw::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("exponential rate must be positive, got {rate}"));
                }
            }
            BidLaw::LogNormal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && *sigma > 0.0) {
                    return bad(format!("log-normal bid law needs sigma > 0, got {sigma}"));
                }
            }
            BidLaw::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("discrete bid law needs matching non-empty values and probs".into());
                }
                if values.windows(2).any(|w| !(w[1] > w[0])) || values[0] < 0.0 {
                    return bad("discrete bid values must be non-negative and strictly increasing".into());
                }
                if probs.iter().any(|p| !(*p > 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return bad("discrete bid probabilities must be positive and sum to one".into());
                }
            }
        }
        Ok(())
    }

    /// Lower end of the support.
    pub fn lower(&self) -> f64 {
        match self {
            BidLaw::Uniform { low, .. } => *low,
            BidLaw::Exponential { .. } | BidLaw::LogNormal { .. } => 0.0,
            BidLaw::Discrete { values, .. } => values[0],
        }
    }

    /// Null price: the smallest reserve that no bid clears, `None` if unbounded.
    pub fn null_price(&self) -> Option<f64> {
        match self {
            BidLaw::Uniform { high, .. } => Some(*high),
            BidLaw::Exponential { .. } | BidLaw::LogNormal { .. } => None,
            BidLaw::Discrete { values, .. } => values.last().copied(),
        }
    }

    pub fn cdf(&self, p: f64) -> f64 {
        match self {
            BidLaw::Uniform { low, high } => ((p - low) / (high - low)).clamp(0.0, 1.0),
            BidLaw::Exponential { rate } => {
                if p <= 0.0 {
                    0.0
                } else {
                    -(-rate * p).exp_m1()
                }
            }
            BidLaw::LogNormal { mu, sigma } => {
                if p <= 0.0 {
                    0.0
                } else {
                    normal::cdf((p.ln() - mu) / sigma)
                }
            }
            BidLaw::Discrete { values, probs } => {
                values.iter().zip(probs).filter(|(v, _)| **v <= p).map(|(_, q)| q).sum::<f64>().min(1.0)
            }
        }
    }

    /// `P(B >= p)`: probability that a reserve of `p` is cleared.
    pub fn survival(&self, p: f64) -> f64 {
        match self {
            BidLaw::Uniform { low, high } => ((high - p) / (high - low)).clamp(0.0, 1.0),
            BidLaw::Exponential { rate } => {
                if p <= 0.0 {
                    1.0
                } else {
                    (-rate * p).exp()
                }
            }
            BidLaw::LogNormal { mu, sigma } => {
                if p <= 0.0 {
                    1.0
                } else {
                    normal::cdf(-(p.ln() - mu) / sigma)
                }
            }
            BidLaw::Discrete { values, probs } => {
                values.iter().zip(probs).filter(|(v, _)| **v >= p).map(|(_, q)| q).sum::<f64>().min(1.0)
            }
        }
    }

    /// Density; zero for discrete laws.
    pub fn pdf(&self, p: f64) -> f64 {
        match self {
            BidLaw::Uniform { low, high } => {
                if p >= *low && p <= *high {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            BidLaw::Exponential { rate } => {
                if p < 0.0 {
                    0.0
                } else {
                    rate * (-rate * p).exp()
                }
            }
            BidLaw::LogNormal { mu, sigma } => {
                if p <= 0.0 {
                    0.0
                } else {
                    normal::pdf((p.ln() - mu) / sigma) / (p * sigma)
                }
            }
            BidLaw::Discrete { .. } => 0.0,
        }
    }

    /// Inverse cdf `F^{-1}(u)` for `u` in `[0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            BidLaw::Uniform { low, high } => low + u * (high - low),
            BidLaw::Exponential { rate } => -(-u).ln_1p() / rate,
            BidLaw::LogNormal { mu, sigma } => {
                if u <= 0.0 {
                    0.0
                } else {
                    (mu + sigma * normal::quantile(u)).exp()
                }
            }
            BidLaw::Discrete { values, probs } => {
                let mut acc = 0.0;
                for (v, q) in values.iter().zip(probs) {
                    acc += q;
                    if acc >= u - 1e-15 {
                        return *v;
                    }
                }
                *values.last().unwrap()
            }
        }
    }

    /// The price whose clearing probability is `s` (inverse survival).
    pub fn price_for_survival(&self, s: f64) -> f64 {
        match self {
            BidLaw::Exponential { rate } => {
                if s <= 0.0 {
                    f64::INFINITY
                } else {
                    -s.ln() / rate
                }
            }
            BidLaw::LogNormal { mu, sigma } => {
                if s <= 0.0 {
                    f64::INFINITY
                } else {
                    (mu - sigma * normal::quantile(s)).exp()
                }
            }
            _ => self.inverse_cdf(1.0 - s),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            BidLaw::Uniform { low, high } => 0.5 * (low + high),
            BidLaw::Exponential { rate } => 1.0 / rate,
            BidLaw::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            BidLaw::Discrete { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
        }
    }

    /// Increasing failure rate, which makes the hazard-rate reserve equation
    /// monotone.
    pub fn has_increasing_failure_rate(&self) -> bool {
        matches!(self, BidLaw::Uniform { .. } | BidLaw::Exponential { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            BidLaw::Uniform { low, high } => rng.gen_range(*low..*high),
            BidLaw::Exponential { rate } => {
                let u: f64 = rng.gen();
                -(-u).ln_1p() / rate
            }
            BidLaw::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            BidLaw::Discrete { .. } => {
                let u: f64 = rng.gen();
                self.inverse_cdf(u)
            }
        }
    }

    /// Upper integration limit for tail integrals.
    pub(crate) fn effective_upper(&self) -> f64 {
        match self.null_price() {
            Some(p) => p,
            None => self.price_for_survival(1e-16),
        }
    }
}

/// Model of the winning bid in the exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BidModel {
    /// The exchange never pays anything.
    Null,
    SingleBidder { law: BidLaw },
    /// Second-price auction among `bidders` i.i.d. bidders.
    SecondPrice { law: BidLaw, bidders: usize },
    /// Sampled highest and second-highest bids.
    Empirical { samples: Arc<Vec<BidSample>> },
}

impl BidModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            BidModel::Null => Ok(()),
            BidModel::SingleBidder { law } => law.validate(),
            BidModel::SecondPrice { law, bidders } => {
                law.validate()?;
                if *bidders == 0 {
                    return Err(Error::InvalidModel("second-price auction needs at least one bidder".into()));
                }
                if matches!(law, BidLaw::Discrete { .. }) {
                    return Err(Error::Unsupported("second-price auctions need a continuous bid law".into()));
                }
                Ok(())
            }
            BidModel::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::Estimation("no bid samples".into()));
                }
                for s in samples.iter() {
                    BidSample::new(s.highest, s.second_highest)?;
                }
                Ok(())
            }
        }
    }

    /// Expected second-price revenue `E[1{B1 >= p} max(B2, p)]` with `K`
    /// i.i.d. bidders drawn from `law`.
    pub fn second_price_revenue(law: &BidLaw, bidders: usize, p: f64) -> Result<f64> {
        let k = bidders as f64;
        let fp = law.cdf(p);
        let boundary = k * p * fp.powi(bidders as i32 - 1) * (1.0 - fp);
        if bidders < 2 {
            return Ok(boundary);
        }
        let upper = law.effective_upper();
        let start = p.max(law.lower());
        let body = integrate_scalar(
            |b| {
                let f = law.cdf(b);
                b * f.powi(bidders as i32 - 2) * law.pdf(b) * (1.0 - f)
            },
            start,
            upper,
            &[],
            Tolerance { abs: 1e-12, rel: 1e-12, max_intervals: 400 },
        )?;
        Ok(k * (k - 1.0) * body + boundary)
    }
}

/// Bids of `bidders` i.i.d. bidders, reduced to the top two.
pub fn draw_auction<R: Rng + ?Sized>(law: &BidLaw, bidders: usize, rng: &mut R) -> BidSample {
    let mut first = 0.0;
    let mut second = 0.0;
    for _ in 0..bidders {
        let b = law.sample(rng);
        if b > first {
            second = first;
            first = b;
        } else if b > second {
            second = b;
        }
    }
    BidSample { highest: first, second_highest: second }
}

/// Sample-average exchange revenue at reserve `p`:
/// `(1/M) sum 1{b1 >= p} max(b2, p)`.
pub fn empirical_revenue(samples: &[BidSample], p: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let total: f64 = samples
        .iter()
        .filter(|s| s.highest >= p)
        .map(|s| s.second_highest.max(p))
        .sum();
    total / samples.len() as f64
}
