use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval::DualProblem;
use super::solve::{solve_problem, SolveOptions};
use crate::error::{Error, Result};
use crate::exchange::Response;
use crate::market::events::{argmax_set, OUTSIDE};
use crate::market::{Active, Atoms, MarketModel, QualityLaw};
use crate::tiebreak::{solve_tiebreak_flow, TieTable, FLOW_TOLERANCE};

/// Settings for [`solve_dual_quality_constrained`].
#[derive(Debug, Clone)]
pub struct QualityOptions {
    pub inner: SolveOptions,
    /// Impressions drawn to represent the quality law.
    pub samples: usize,
    pub seed: u64,
    pub max_outer: usize,
    /// Initial multiplier step, relative to the multiplier scale.
    pub step: f64,
    /// A floor counts as met within this relative gap.
    pub tolerance: f64,
    /// Multipliers beyond this mark the floors as unattainable.
    pub multiplier_cap: f64,
}

impl Default for QualityOptions {
    fn default() -> Self {
        QualityOptions {
            inner: SolveOptions::default(),
            samples: 50_000,
            seed: 0x9a11,
            max_outer: 200,
            step: 1.0,
            tolerance: 5e-3,
            multiplier_cap: 1e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QualitySolution {
    pub v: Vec<f64>,
    /// Multiplier on each advertiser's quality floor.
    pub multipliers: Vec<f64>,
    /// Mean quality per delivered impression under the implied control.
    pub achieved: Vec<f64>,
    pub floors: Vec<f64>,
    /// Dual objective including the `-gamma_a l_a rho_a` terms.
    pub objective: f64,
    pub feasible: bool,
    pub converged: bool,
    pub iterations: usize,
}

/// Maximizes exchange revenue subject to delivery and to each advertiser's
/// mean delivered quality being at least its floor. Projected subgradient
/// steps on the floor multipliers wrap an exact sample-average solve of the
/// bid prices; ties in the sample are split by the tie-break flow.
pub fn solve_dual_quality_constrained(
    model: &MarketModel,
    response: &dyn Response,
    floors: &[f64],
    opts: &QualityOptions,
) -> Result<QualitySolution> {
    let n = model.len();
    if floors.len() != n {
        return Err(Error::Config(format!("expected {n} quality floors, got {}", floors.len())));
    }
    if floors.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::Config("quality floors must be finite and non-negative".into()));
    }
    let rho = model.rho();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let raw: Vec<Vec<f64>> = (0..opts.samples.max(1)).map(|_| model.law.sample(&mut rng).values).collect();
    let weight = 1.0 / raw.len() as f64;

    let mut gamma = vec![1.0; n];
    let mut inner = opts.inner.clone();
    let mut best: Option<QualitySolution> = None;
    for k in 0..opts.max_outer {
        let scaled: Vec<Vec<f64>> = raw.iter().map(|q| q.iter().zip(&gamma).map(|(x, g)| x * g).collect()).collect();
        let problem = DualProblem {
            law: QualityLaw::Atoms(Atoms::new(vec![weight; scaled.len()], scaled.clone())?),
            rho: rho.clone(),
            active: Active::all(n),
            response,
            options: inner.events,
        };
        let sol = solve_problem(&problem, &inner)?;
        inner.initial = Some(sol.v.clone());
        let rule = solve_tiebreak_flow(&TieTable::from_events(&sol.evaluation.table), &rho, FLOW_TOLERANCE)?;

        let mut delivered_quality = vec![0.0; n];
        let mut adjusted = vec![0.0; n];
        let active = Active::all(n);
        for (q, s) in raw.iter().zip(&scaled) {
            for a in 0..n {
                adjusted[a] = s[a] - sol.v[a];
            }
            let (lambda, winners) = argmax_set(&adjusted, &active);
            let kept = 1.0 - response.respond(lambda).survival;
            if kept <= 0.0 {
                continue;
            }
            for (bit, p) in rule.weights(winners, winners) {
                if bit != OUTSIDE {
                    let a = bit.trailing_zeros() as usize;
                    delivered_quality[a] += weight * kept * p * q[a];
                }
            }
        }
        let achieved: Vec<f64> =
            (0..n).map(|a| if rho[a] > 0.0 { delivered_quality[a] / rho[a] } else { f64::INFINITY }).collect();
        let gap = |a: usize| (achieved[a] - floors[a]) / floors[a].max(achieved[a].abs()).max(1e-12);
        let met = (0..n).all(|a| rho[a] == 0.0 || gap(a) >= -opts.tolerance);
        let stationary = met && (0..n).all(|a| rho[a] == 0.0 || gamma[a] == 0.0 || gap(a) <= opts.tolerance);
        let objective = sol.evaluation.objective - (0..n).map(|a| gamma[a] * floors[a] * rho[a]).sum::<f64>();
        let current = QualitySolution {
            v: sol.v.clone(),
            multipliers: gamma.clone(),
            achieved: achieved.clone(),
            floors: floors.to_vec(),
            objective,
            feasible: met,
            converged: stationary && sol.converged,
            iterations: k + 1,
        };
        log::debug!("quality step {k}: multipliers {gamma:?} achieved {achieved:?}");
        if current.converged {
            return Ok(current);
        }
        if best.as_ref().is_none_or(|b| current.feasible && !b.feasible) {
            best = Some(current);
        } else if let Some(b) = best.as_mut() {
            b.iterations = k + 1;
        }
        let scale = gamma.iter().cloned().fold(1.0, f64::max);
        let step = opts.step * scale / ((k + 1) as f64).sqrt();
        for a in 0..n {
            if rho[a] > 0.0 {
                gamma[a] = (gamma[a] - step * gap(a)).max(0.0);
            }
        }
        if gamma.iter().any(|g| *g > opts.multiplier_cap) {
            log::warn!("quality floors appear unattainable: multipliers exceed {}", opts.multiplier_cap);
            break;
        }
    }
    let mut out = best.expect("at least one outer iteration");
    out.converged = false;
    Ok(out)
}
