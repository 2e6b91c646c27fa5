use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::lower_quantile_index;
use crate::error::{Error, Result};
use crate::numeric::normal;
use crate::policy::replication_rng;

/// Single-advertiser quality law with one unknown parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum QualityFamily {
    /// Unknown mean.
    Exponential { mean: f64 },
    /// Unknown mean, known standard deviation.
    Normal { mean: f64, sd: f64 },
}

impl QualityFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            QualityFamily::Exponential { mean } => *mean > 0.0 && mean.is_finite(),
            QualityFamily::Normal { mean, sd } => mean.is_finite() && *sd > 0.0 && sd.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid parameters for {self:?}")))
        }
    }

    /// Bid price `v` with `P(Q > v) = rho` given the mean.
    pub fn price(&self, mean: f64, rho: f64) -> f64 {
        match self {
            QualityFamily::Exponential { .. } => -mean * rho.ln(),
            QualityFamily::Normal { sd, .. } => mean + sd * normal::quantile(1.0 - rho),
        }
    }

    /// Limit of `var(sample quantile) / var(plug-in estimate)`.
    pub fn analytic_efficiency(&self, rho: f64) -> f64 {
        match self {
            QualityFamily::Exponential { .. } => (1.0 - rho) / (rho * rho.ln().powi(2)),
            QualityFamily::Normal { .. } => {
                let z = normal::quantile(1.0 - rho);
                2.0 * std::f64::consts::PI * rho * (1.0 - rho) * (z * z).exp()
            }
        }
    }

    fn draw<R: Rng>(&self, m: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            QualityFamily::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample_iter(rng).take(m).collect(),
            QualityFamily::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample_iter(rng).take(m).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub m: usize,
    pub rho: f64,
    /// `M var` of the sample `(1 - rho)`-quantile.
    pub var_saa: f64,
    /// `M var` of the maximum-likelihood plug-in price.
    pub var_mle: f64,
    pub ratio: f64,
    pub analytic: f64,
    pub reps: u64,
}

fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)
}

/// Compares the sample-quantile bid price with the plug-in price from the
/// fitted mean over `reps` training sets of each size.
pub fn estimator_efficiency(family: QualityFamily, rho: f64, sizes: &[usize], reps: u64, seed: u64) -> Result<Vec<EfficiencyRow>> {
    family.validate()?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Config(format!("rho must lie in (0, 1), got {rho}")));
    }
    if reps < 2 || sizes.contains(&0) {
        return Err(Error::Config("need at least two replications and non-empty training sets".into()));
    }
    let mut rows = Vec::new();
    for (i, &m) in sizes.iter().enumerate() {
        let estimates: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(seed.wrapping_add(i as u64), rep);
                let mut xs = family.draw(m, &mut rng);
                let mean = xs.iter().sum::<f64>() / m as f64;
                xs.sort_by(f64::total_cmp);
                (xs[lower_quantile_index(m, rho)], family.price(mean, rho))
            })
            .collect();
        let saa: Vec<f64> = estimates.iter().map(|e| e.0).collect();
        let mle: Vec<f64> = estimates.iter().map(|e| e.1).collect();
        let var_saa = variance(&saa) * m as f64;
        let var_mle = variance(&mle) * m as f64;
        rows.push(EfficiencyRow {
            m,
            rho,
            var_saa,
            var_mle,
            ratio: var_saa / var_mle,
            analytic: family.analytic_efficiency(rho),
            reps,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let e = QualityFamily::Exponential { mean: 1.0 };
        assert!((e.analytic_efficiency(0.2032) - 1.544).abs() < 1e-3);
        let n = QualityFamily::Normal { mean: 0.0, sd: 1.0 };
        assert!((n.analytic_efficiency(0.5) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn prices_are_upper_quantiles() {
        let e = QualityFamily::Exponential { mean: 2.0 };
        assert!(((-e.price(2.0, 0.3) / 2.0).exp() - 0.3).abs() < 1e-15);
        let n = QualityFamily::Normal { mean: 1.0, sd: 2.0 };
        assert!((n.price(1.0, 0.5) - 1.0).abs() < 1e-12);
    }
}
