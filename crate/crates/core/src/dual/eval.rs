use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exchange::Response;
use crate::market::events::{argmax_set, winner_count, winner_indices};
use crate::market::{Active, EventMass, EventOptions, EventTable, MarketModel, QualityLaw, Winners, OUTSIDE};

/// The dual of the deterministic approximation over an active set:
/// `psi(v) = E R(max(Q_a - v_a)) + sum_a v_a rho_a`.
pub struct DualProblem<'a> {
    /// Yield-weighted quality law.
    pub law: QualityLaw,
    pub rho: Vec<f64>,
    pub active: Active,
    pub response: &'a dyn Response,
    pub options: EventOptions,
}

impl<'a> DualProblem<'a> {
    pub fn new(model: &MarketModel, response: &'a dyn Response, options: EventOptions) -> Result<DualProblem<'a>> {
        Ok(DualProblem {
            law: model.weighted_law()?,
            rho: model.rho(),
            active: Active::all(model.len()),
            response,
            options,
        })
    }

    pub fn dimension(&self) -> usize {
        self.rho.len()
    }

    pub fn evaluate(&self, v: &[f64]) -> Result<DualEvaluation> {
        let table = self.law.events(v, &self.active, self.response, &self.options)?;
        Ok(DualEvaluation::from_table(v, &self.rho, self.active, table))
    }

    pub fn objective(&self, v: &[f64]) -> Result<f64> {
        Ok(self.evaluate(v)?.objective)
    }

    /// Objective and derivatives from `samples` draws of the quality law,
    /// with the standard error of the objective.
    pub fn monte_carlo(&self, v: &[f64], samples: usize, seed: u64) -> Result<MonteCarloEvaluation> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = samples.max(1);
        let w = 1.0 / n as f64;
        let mut table = EventTable::new();
        let mut adjusted = vec![0.0; v.len()];
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            let q = self.law.sample(&mut rng);
            for a in self.active.indices() {
                adjusted[a] = q.values[a] - v[a];
            }
            let (lambda, winners) = argmax_set(&adjusted, &self.active);
            if winners == 0 {
                continue;
            }
            let r = self.response.respond(lambda);
            sum += r.value;
            sumsq += r.value * r.value;
            table.add(winners, EventMass::from_response(&r, w));
        }
        let mean = sum * w;
        let var = (sumsq * w - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0).max(1.0);
        Ok(MonteCarloEvaluation {
            evaluation: DualEvaluation::from_table(v, &self.rho, self.active, table),
            standard_error: (var * w).sqrt(),
        })
    }
}

/// Objective, one-sided derivatives and event table at one dual vector.
#[derive(Debug, Clone)]
pub struct DualEvaluation {
    pub v: Vec<f64>,
    pub objective: f64,
    /// `E R(max(Q_a - v_a))`.
    pub expected_response: f64,
    /// Derivative along `+e_a`; zero for inactive advertisers.
    pub forward: Vec<f64>,
    /// Derivative along `-e_a`; zero for inactive advertisers.
    pub backward: Vec<f64>,
    pub table: EventTable,
    rho: Vec<f64>,
    active: Active,
}

impl DualEvaluation {
    pub fn from_table(v: &[f64], rho: &[f64], active: Active, table: EventTable) -> DualEvaluation {
        let expected_response = table.expected_value();
        let objective = expected_response + active.indices().map(|a| v[a] * rho[a]).sum::<f64>();
        let mut forward = vec![0.0; v.len()];
        let mut backward = vec![0.0; v.len()];
        for a in active.indices() {
            let bit = 1u64 << a;
            forward[a] = rho[a] - table.kept_strict_within(bit);
            backward[a] = table.kept_touching(bit) - rho[a];
        }
        DualEvaluation { v: v.to_vec(), objective, expected_response, forward, backward, table, rho: rho.to_vec(), active }
    }

    pub fn active(&self) -> Active {
        self.active
    }

    fn rho_of(&self, set: u64) -> f64 {
        winner_indices(set).map(|a| self.rho[a]).sum()
    }

    /// Derivative along `+1_set`.
    pub fn forward_along(&self, set: u64) -> f64 {
        self.rho_of(set) - self.table.kept_strict_within(set)
    }

    /// Derivative along `-1_set`.
    pub fn backward_along(&self, set: u64) -> f64 {
        self.table.kept_touching(set) - self.rho_of(set)
    }

    /// Probability mass of every multi-member winner set.
    pub fn tie_masses(&self) -> Vec<(Winners, f64)> {
        self.table.ties().filter(|(_, m)| m.kept > 0.0 || m.value != 0.0).map(|(w, m)| (w, m.kept)).collect()
    }

    /// Whether the objective has a kink here: some advertiser shares a
    /// winner set with positive probability, or the exchange response is
    /// not unique on an event carrying probability.
    pub fn is_nonsmooth(&self) -> bool {
        self.table.iter().any(|(w, m)| {
            w & !OUTSIDE != 0 && (winner_count(w) > 1 && m.kept > 1e-15 || m.kept - m.kept_strict > 1e-15)
        })
    }

    /// The steepest subset direction: `(set, sign, derivative)` with the
    /// most negative derivative per unit length, if any is below `-tol`.
    pub fn steepest_subset(&self, tol: f64) -> Option<(u64, f64, f64)> {
        let members: Vec<usize> = self.active.indices().collect();
        let mut best: Option<(u64, f64, f64)> = None;
        let mut best_score = -tol;
        let mut consider = |set: u64, best: &mut Option<(u64, f64, f64)>| {
            let len = (set.count_ones() as f64).sqrt();
            for (sign, d) in [(1.0, self.forward_along(set)), (-1.0, self.backward_along(set))] {
                if d < -tol && d / len < best_score {
                    best_score = d / len;
                    *best = Some((set, sign, d));
                }
            }
        };
        if members.len() <= 12 {
            for mask in 1u64..(1u64 << members.len()) {
                let set = winner_indices(mask).map(|i| 1u64 << members[i]).fold(0, |x, y| x | y);
                consider(set, &mut best);
            }
        } else {
            for &a in &members {
                consider(1u64 << a, &mut best);
            }
            let ties: Vec<u64> = self.table.ties().map(|(w, _)| w & !OUTSIDE).filter(|w| *w != 0).collect();
            for set in ties {
                consider(set, &mut best);
            }
        }
        best
    }

    /// All subset derivatives are at least `-tol`.
    pub fn is_stationary(&self, tol: f64) -> bool {
        self.steepest_subset(tol).is_none()
    }
}

/// Monte Carlo evaluation with the objective's standard error.
#[derive(Debug, Clone)]
pub struct MonteCarloEvaluation {
    pub evaluation: DualEvaluation,
    pub standard_error: f64,
}

/// `psi(v)` for the model's yield-weighted qualities.
pub fn dual_objective(model: &MarketModel, response: &dyn Response, v: &[f64]) -> Result<f64> {
    DualProblem::new(model, response, EventOptions::default())?.objective(v)
}

/// Objective and one-sided derivatives.
pub fn dual_derivatives(model: &MarketModel, response: &dyn Response, v: &[f64]) -> Result<DualEvaluation> {
    DualProblem::new(model, response, EventOptions::default())?.evaluate(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::RevenueCurve;
    use crate::market::{Advertiser, Marginal};

    fn uniform_model(rho: f64) -> MarketModel {
        let advs = vec![Advertiser { id: 1, rho, penalty: 0.0, quality_floor: None }];
        MarketModel::new(advs, QualityLaw::Independent(vec![Marginal::Uniform { low: 0.0, high: 1.0 }]), 1.0).unwrap()
    }

    #[test]
    fn uniform_closed_forms() {
        let m = uniform_model(0.5);
        let null = RevenueCurve::null();
        assert!((dual_objective(&m, &null, &[0.5]).unwrap() - 0.375).abs() < 1e-14);
        assert!((dual_objective(&m, &null, &[0.0]).unwrap() - 0.5).abs() < 1e-14);
        let e = dual_derivatives(&m, &null, &[0.5]).unwrap();
        assert!(e.forward[0].abs() < 1e-14);
        assert!(e.backward[0].abs() < 1e-14);
    }

    #[test]
    fn large_bid_prices_grow_linearly() {
        let m = uniform_model(0.3);
        let null = RevenueCurve::null();
        let a = dual_objective(&m, &null, &[10.0]).unwrap();
        let b = dual_objective(&m, &null, &[20.0]).unwrap();
        assert!(((b - a) / 10.0 - 0.3).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let m = uniform_model(0.5);
        let null = RevenueCurve::null();
        let p = DualProblem::new(&m, &null, EventOptions::default()).unwrap();
        let mc = p.monte_carlo(&[0.3], 200_000, 3).unwrap();
        let exact = p.objective(&[0.3]).unwrap();
        assert!((mc.evaluation.objective - exact).abs() < 4.0 * mc.standard_error);
    }
}
