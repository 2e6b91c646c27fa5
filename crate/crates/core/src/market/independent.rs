//! Independent continuous quality marginals, one per advertiser.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::events::{Active, EventMass, EventTable, OUTSIDE};
use super::model::EventOptions;
use crate::error::{Error, Result};
use crate::exchange::Response;
use crate::numeric::{integrate, normal};

const TAIL: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Marginal {
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Uniform { low, high } => low.is_finite() && high.is_finite() && high > low,
            Marginal::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Marginal::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma > 0.0,
            Marginal::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("invalid quality marginal {self:?}")))
        }
    }

    pub fn cdf(&self, q: f64) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => ((q - low) / (high - low)).clamp(0.0, 1.0),
            Marginal::Exponential { rate } => {
                if q <= 0.0 {
                    0.0
                } else {
                    -(-rate * q).exp_m1()
                }
            }
            Marginal::LogNormal { mu, sigma } => {
                if q <= 0.0 {
                    0.0
                } else {
                    normal::cdf((q.ln() - mu) / sigma)
                }
            }
            Marginal::Normal { mean, sd } => normal::cdf((q - mean) / sd),
        }
    }

    pub fn pdf(&self, q: f64) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => {
                if q >= low && q <= high {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Marginal::Exponential { rate } => {
                if q < 0.0 {
                    0.0
                } else {
                    rate * (-rate * q).exp()
                }
            }
            Marginal::LogNormal { mu, sigma } => {
                if q <= 0.0 {
                    0.0
                } else {
                    normal::pdf((q.ln() - mu) / sigma) / (q * sigma)
                }
            }
            Marginal::Normal { mean, sd } => normal::pdf((q - mean) / sd) / sd,
        }
    }

    /// Upper quantile: the `q` with `P(Q > q) = rho`.
    pub fn upper_quantile(&self, rho: f64) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => high - rho * (high - low),
            Marginal::Exponential { rate } => -rho.ln() / rate,
            Marginal::LogNormal { mu, sigma } => (mu + sigma * normal::quantile(1.0 - rho)).exp(),
            Marginal::Normal { mean, sd } => mean + sd * normal::quantile(1.0 - rho),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => 0.5 * (low + high),
            Marginal::Exponential { rate } => 1.0 / rate,
            Marginal::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Marginal::Normal { mean, .. } => mean,
        }
    }

    pub fn scaled(&self, gamma: f64) -> Marginal {
        match *self {
            Marginal::Uniform { low, high } => Marginal::Uniform { low: gamma * low, high: gamma * high },
            Marginal::Exponential { rate } => Marginal::Exponential { rate: rate / gamma },
            Marginal::LogNormal { mu, sigma } => Marginal::LogNormal { mu: mu + gamma.ln(), sigma },
            Marginal::Normal { mean, sd } => Marginal::Normal { mean: gamma * mean, sd: gamma * sd },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Uniform { low, high } => rng.gen_range(low..high),
            Marginal::Exponential { rate } => -(-rng.gen::<f64>()).ln_1p() / rate,
            Marginal::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            Marginal::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
        }
    }

    /// Integration range carrying all but a negligible tail.
    fn range(&self) -> (f64, f64) {
        match *self {
            Marginal::Uniform { low, high } => (low, high),
            Marginal::Exponential { rate } => (0.0, 745.0 / rate),
            Marginal::LogNormal { mu, sigma } => ((mu - TAIL * sigma).exp(), (mu + TAIL * sigma).exp()),
            Marginal::Normal { mean, sd } => (mean - TAIL * sd, mean + TAIL * sd),
        }
    }

    /// Points where the density is not smooth.
    fn breaks(&self) -> Vec<f64> {
        match *self {
            Marginal::Uniform { low, high } => vec![low, high],
            Marginal::Exponential { .. } => vec![0.0],
            _ => Vec::new(),
        }
    }
}

/// Event table for independent marginals. Continuous laws produce no ties
/// among advertisers; the outside option wins when every adjusted quality is
/// negative.
pub fn events(
    marginals: &[Marginal],
    v: &[f64],
    active: &Active,
    response: &dyn Response,
    opts: &EventOptions,
) -> Result<EventTable> {
    let members: Vec<usize> = active.indices().collect();
    let kinks = response.kinks();
    let mut table = EventTable::new();
    if active.outside {
        let p: f64 = members.iter().map(|&b| marginals[b].cdf(v[b])).product();
        if p > 0.0 {
            table.add(OUTSIDE, EventMass::from_response(&response.respond(0.0), p));
        }
    }
    for &a in &members {
        let (mut lo, hi) = marginals[a].range();
        if active.outside {
            lo = lo.max(v[a]);
        }
        if !(hi > lo) {
            continue;
        }
        let mut breaks: Vec<f64> = kinks.iter().map(|k| k + v[a]).collect();
        breaks.extend(marginals[a].breaks());
        for &b in &members {
            if b != a {
                breaks.extend(marginals[b].breaks().into_iter().map(|e| e - v[b] + v[a]));
            }
        }
        let integrand = |q: f64| {
            let mut w = marginals[a].pdf(q);
            for &b in &members {
                if b != a && w > 0.0 {
                    w *= marginals[b].cdf(q - v[a] + v[b]);
                }
            }
            if w == 0.0 {
                return [0.0; 4];
            }
            let r = response.respond(q - v[a]);
            [w * r.value, w * (1.0 - r.survival), w * (1.0 - r.survival_max), w * r.revenue]
        };
        let m = integrate(integrand, lo, hi, &breaks, opts.tolerance)?;
        table.add(1u64 << a, EventMass::from_array(m));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::RevenueCurve;

    #[test]
    fn uniform_single_advertiser_closed_form() {
        // E[max(Q - v, 0)] = (1 - v)^2 / 2 and P(Q > v) = 1 - v
        let m = [Marginal::Uniform { low: 0.0, high: 1.0 }];
        let t = events(&m, &[0.5], &Active::all(1), &RevenueCurve::null(), &EventOptions::default()).unwrap();
        assert!((t.expected_value() - 0.125).abs() < 1e-14);
        assert!((t.get(1).kept - 0.5).abs() < 1e-14);
        assert!((t.get(OUTSIDE).kept - 0.5).abs() < 1e-14);
    }

    #[test]
    fn two_uniforms_split_evenly() {
        let m = [Marginal::Uniform { low: 0.0, high: 1.0 }; 2];
        let t = events(&m, &[0.0, 0.0], &Active::all(2), &RevenueCurve::null(), &EventOptions::default()).unwrap();
        assert!((t.get(0b01).kept - 0.5).abs() < 1e-14);
        // E[max(Q1, Q2)] = 2/3
        assert!((t.expected_value() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn upper_quantiles() {
        assert!((Marginal::Exponential { rate: 2.0 }.upper_quantile(0.5) - 0.5f64.ln() / -2.0).abs() < 1e-15);
        let n = Marginal::Normal { mean: 1.0, sd: 2.0 };
        assert!((1.0 - n.cdf(n.upper_quantile(0.1)) - 0.1).abs() < 1e-14);
    }
}
