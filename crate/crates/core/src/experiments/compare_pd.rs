use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{solve_dual, solve_dual_saa, SolveOptions};
use crate::error::{Error, Result};
use crate::exchange::{Response, RevenueCurve};
use crate::fluid::fluid_evaluate;
use crate::market::{fit_mixture, membership_samples, MarketModel, QualityLaw, QualityVector};
use crate::policy::{mean_and_standard_error, optimal_policy, replication_rng, PolicyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub m: usize,
    pub est_mean: f64,
    pub est_std: f64,
    pub pd_mean: f64,
    pub pd_std: f64,
    pub opt: f64,
    pub reps: u64,
}

/// Per-impression fluid yield on the true model at bid prices `v`.
fn score(model: &MarketModel, response: &dyn Response, v: Vec<f64>, opts: &SolveOptions) -> Result<f64> {
    let policy = PolicyConfig { v, ..Default::default() };
    Ok(fluid_evaluate(model, response, &policy, &opts.events)?.total_yield)
}

/// Bid prices learned from `M` sampled impressions, scored on the true
/// model: fitted-mixture prices (`est`) against sample-average prices
/// (`pd`), with the true optimum (`opt`) as reference.
pub fn compare_pd(model: &MarketModel, sizes: &[usize], reps: u64, seed: u64, opts: &SolveOptions) -> Result<Vec<CompareRow>> {
    if !matches!(model.law, QualityLaw::Mixture(_)) {
        return Err(Error::Unsupported("the comparison fits a log-normal type mixture".into()));
    }
    if sizes.iter().any(|m| *m < model.len()) {
        return Err(Error::Config("each training set needs at least one impression per advertiser".into()));
    }
    let null = RevenueCurve::null();
    let (opt_solution, opt_policy) = optimal_policy(model, &null, opts)?;
    let opt = fluid_evaluate(model, &null, &opt_policy, &opts.events)?.total_yield;
    log::info!("optimal fluid value {opt} (dual {})", opt_solution.evaluation.objective);
    let penalties: Vec<f64> = model.advertisers.iter().map(|a| a.penalty).collect();
    let rho = model.rho();

    let mut rows = Vec::new();
    for (i, &m) in sizes.iter().enumerate() {
        let scores: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<(f64, f64)> {
                let mut rng = replication_rng(seed.wrapping_add(i as u64), rep);
                let samples: Vec<QualityVector> = (0..m).map(|_| model.sample_impression(&mut rng)).collect();
                let values: Vec<Vec<f64>> = samples.iter().map(|q| q.values.clone()).collect();

                let fitted = fit_mixture(&membership_samples(&values), &penalties)?;
                let est_model = MarketModel::new(model.advertisers.clone(), QualityLaw::Mixture(fitted), model.gamma)?;
                let est_v = solve_dual(&est_model, &null, opts)?.v;

                let weighted: Vec<QualityVector> = samples
                    .iter()
                    .map(|q| QualityVector { values: q.values.iter().map(|x| x * model.gamma).collect(), type_id: q.type_id })
                    .collect();
                let pd_v = solve_dual_saa(&weighted, &rho, &null, opts)?.v;
                Ok((score(model, &null, est_v, opts)?, score(model, &null, pd_v, opts)?))
            })
            .collect::<Result<_>>()?;
        let est: Vec<f64> = scores.iter().map(|s| s.0).collect();
        let pd: Vec<f64> = scores.iter().map(|s| s.1).collect();
        let sd = |xs: &[f64]| {
            let (mean, se) = mean_and_standard_error(xs);
            (mean, se * (xs.len() as f64).sqrt())
        };
        let (est_mean, est_std) = sd(&est);
        let (pd_mean, pd_std) = sd(&pd);
        log::info!("M = {m}: est {est_mean} ({est_std}), pd {pd_mean} ({pd_std})");
        rows.push(CompareRow { m, est_mean, est_std, pd_mean, pd_std, opt, reps });
    }
    Ok(rows)
}
