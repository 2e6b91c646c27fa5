use rand::Rng;
use serde::{Deserialize, Serialize};

use super::atoms::Atoms;
use super::events::{Active, EventTable, MAX_ADVERTISERS};
use super::independent::Marginal;
use super::mixture::Mixture;
use crate::error::{Error, Result};
use crate::exchange::Response;
use crate::numeric::Tolerance;

/// A guaranteed contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advertiser {
    pub id: u32,
    /// Share of the impressions promised to this advertiser.
    pub rho: f64,
    /// Goodwill lost when the advertiser receives an impression outside its
    /// targeting.
    #[serde(default)]
    pub penalty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_floor: Option<f64>,
}

/// A user type of the log-normal mixture, in configuration form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserType {
    pub members: Vec<u32>,
    pub probability: f64,
    pub log_mean: Vec<f64>,
    pub log_cov: Vec<Vec<f64>>,
}

/// Qualities of one impression (one entry per advertiser, model order).
#[derive(Debug, Clone, PartialEq)]
pub struct QualityVector {
    pub values: Vec<f64>,
    /// Index of the drawn type or atom; 0 for laws without types.
    pub type_id: usize,
}

/// Joint law of the advertisers' qualities.
#[derive(Debug, Clone)]
pub enum QualityLaw {
    Mixture(Mixture),
    Atoms(Atoms),
    Independent(Vec<Marginal>),
}

/// Numerical settings for computing event tables.
#[derive(Debug, Clone, Copy)]
pub struct EventOptions {
    pub tolerance: Tolerance,
    /// Draws per type when a degenerate type is handled by simulation.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for EventOptions {
    fn default() -> Self {
        EventOptions { tolerance: Tolerance::default(), mc_samples: 200_000, seed: 0x5eed }
    }
}

impl QualityLaw {
    pub fn dimension(&self) -> usize {
        match self {
            QualityLaw::Mixture(m) => m.dimension(),
            QualityLaw::Atoms(a) => a.dimension(),
            QualityLaw::Independent(m) => m.len(),
        }
    }

    /// Law of `gamma * Q`.
    pub fn scaled(&self, gamma: f64) -> Result<QualityLaw> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidModel(format!("quality scale must be positive and finite, got {gamma}")));
        }
        Ok(match self {
            QualityLaw::Mixture(m) => QualityLaw::Mixture(m.scaled(gamma)),
            QualityLaw::Atoms(a) => QualityLaw::Atoms(a.scaled(gamma)),
            QualityLaw::Independent(ms) => QualityLaw::Independent(ms.iter().map(|m| m.scaled(gamma)).collect()),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> QualityVector {
        match self {
            QualityLaw::Mixture(m) => m.sample(rng),
            QualityLaw::Atoms(a) => a.sample(rng),
            QualityLaw::Independent(ms) => QualityVector { values: ms.iter().map(|m| m.sample(rng)).collect(), type_id: 0 },
        }
    }

    /// Event table of the adjusted qualities `Q - v` over the active set.
    pub fn events(&self, v: &[f64], active: &Active, response: &dyn Response, opts: &EventOptions) -> Result<EventTable> {
        match self {
            QualityLaw::Mixture(m) => m.events(v, active, response, opts),
            QualityLaw::Atoms(a) => Ok(a.events(v, active, response)),
            QualityLaw::Independent(ms) => super::independent::events(ms, v, active, response, opts),
        }
    }

    /// Exact for atoms; for mixtures, whether some type needs simulation.
    pub fn is_discrete(&self) -> bool {
        matches!(self, QualityLaw::Atoms(_))
    }
}

/// Advertisers, their quality law and the quality weight.
#[derive(Debug, Clone)]
pub struct MarketModel {
    pub advertisers: Vec<Advertiser>,
    pub law: QualityLaw,
    pub gamma: f64,
}

impl MarketModel {
    pub fn new(advertisers: Vec<Advertiser>, law: QualityLaw, gamma: f64) -> Result<MarketModel> {
        let model = MarketModel { advertisers, law, gamma };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.advertisers.len() > MAX_ADVERTISERS {
            return bad(format!("at most {MAX_ADVERTISERS} advertisers are supported"));
        }
        if self.law.dimension() != self.advertisers.len() {
            return bad(format!(
                "quality law has {} coordinates for {} advertisers",
                self.law.dimension(),
                self.advertisers.len()
            ));
        }
        let mut ids: Vec<u32> = self.advertisers.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("advertiser ids must be unique".into());
        }
        if ids.first() == Some(&0) {
            return bad("advertiser id 0 is reserved for the outside option".into());
        }
        for a in &self.advertisers {
            if !(a.rho >= 0.0 && a.rho <= 1.0) {
                return bad(format!("advertiser {} has rho {} outside [0, 1]", a.id, a.rho));
            }
            if !(a.penalty >= 0.0 && a.penalty.is_finite()) {
                return bad(format!("advertiser {} has negative penalty", a.id));
            }
        }
        if self.total_rho() > 1.0 + 1e-12 {
            return bad(format!("contract shares sum to {} > 1", self.total_rho()));
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("quality weight must be non-negative, got {}", self.gamma));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.advertisers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.advertisers.is_empty()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.advertisers.iter().map(|a| a.rho).collect()
    }

    pub fn total_rho(&self) -> f64 {
        self.advertisers.iter().map(|a| a.rho).sum()
    }

    /// Share left to the outside option.
    pub fn outside_rho(&self) -> f64 {
        (1.0 - self.total_rho()).max(0.0)
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.advertisers.iter().position(|a| a.id == id)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.advertisers.iter().map(|a| a.id).collect()
    }

    /// Law of the yield-weighted qualities `gamma * Q` that the solver sees.
    pub fn weighted_law(&self) -> Result<QualityLaw> {
        if self.gamma == 1.0 {
            Ok(self.law.clone())
        } else {
            self.law.scaled(self.gamma)
        }
    }

    /// Same model with another quality weight.
    pub fn with_gamma(&self, gamma: f64) -> MarketModel {
        MarketModel { gamma, ..self.clone() }
    }

    /// Same model with other contract shares.
    pub fn with_rho(&self, rho: &[f64]) -> Result<MarketModel> {
        let mut m = self.clone();
        for (a, r) in m.advertisers.iter_mut().zip(rho) {
            a.rho = *r;
        }
        m.validate()?;
        Ok(m)
    }

    pub fn sample_impression<R: Rng + ?Sized>(&self, rng: &mut R) -> QualityVector {
        self.law.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn adv(id: u32, rho: f64, penalty: f64) -> Advertiser {
        Advertiser { id, rho, penalty, quality_floor: None }
    }

    #[test]
    fn degenerate_single_type_is_constant() {
        let types = vec![UserType { members: vec![1], probability: 1.0, log_mean: vec![0.0], log_cov: vec![vec![0.0]] }];
        let advs = vec![adv(1, 0.5, 0.0)];
        let law = Mixture::from_types(&advs, &types).unwrap();
        let m = MarketModel::new(advs, QualityLaw::Mixture(law), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(m.sample_impression(&mut rng).values, vec![1.0]);
        }
    }

    #[test]
    fn out_of_type_quality_is_minus_penalty() {
        let types = vec![UserType { members: vec![1], probability: 1.0, log_mean: vec![0.3], log_cov: vec![vec![0.5]] }];
        let advs = vec![adv(1, 0.2, 1.0), adv(2, 0.2, 3.0)];
        let law = Mixture::from_types(&advs, &types).unwrap();
        let m = MarketModel::new(advs, QualityLaw::Mixture(law), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q = m.sample_impression(&mut rng);
            assert_eq!(q.values[1], -3.0);
            assert!(q.values[0] > 0.0);
        }
    }

    #[test]
    fn model_validation() {
        let law = QualityLaw::Independent(vec![Marginal::Uniform { low: 0.0, high: 1.0 }]);
        assert!(MarketModel::new(vec![adv(0, 0.5, 0.0)], law.clone(), 1.0).is_err());
        assert!(MarketModel::new(vec![adv(1, 1.5, 0.0)], law.clone(), 1.0).is_err());
        assert!(MarketModel::new(vec![adv(1, 0.5, -1.0)], law.clone(), 1.0).is_err());
        assert!(MarketModel::new(vec![adv(1, 0.5, 0.0), adv(2, 0.5, 0.0)], law.clone(), 1.0).is_err());
        assert!(MarketModel::new(vec![adv(1, 0.5, 0.0)], law, 1.0).is_ok());
    }
}
