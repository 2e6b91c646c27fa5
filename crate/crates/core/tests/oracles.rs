mod common;

use std::collections::BTreeMap;

use adyield::dual::{solve_dual, solve_dual_saa, SolveOptions};
use adyield::exchange::RevenueCurve;
use adyield::experiments::{compare_pd, estimator_efficiency, QualityFamily};
use adyield::market::{argmax_set, fit_mixture, membership_samples, Active, QualityLaw, QualityVector};
use adyield::policy::{dap_upper_bound, mean_and_standard_error, simulate_replications, PolicyConfig};
use approx::assert_relative_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::*;

fn mixture_of(law: &QualityLaw) -> &adyield::market::Mixture {
    match law {
        QualityLaw::Mixture(m) => m,
        _ => panic!("fixture is not a mixture"),
    }
}

#[test]
fn type_frequencies_pass_chi_square() {
    let (model, _, _) = fixture("instance1.json");
    let types = mixture_of(&model.law).types();
    let draws = 100_000;
    let mut counts = vec![0.0; types.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..draws {
        counts[model.law.sample(&mut rng).type_id] += 1.0;
    }
    let stat: f64 = types
        .iter()
        .zip(&counts)
        .map(|(t, c)| {
            let e = t.probability * draws as f64;
            (c - e).powi(2) / e
        })
        .sum();
    let p = 1.0 - ChiSquared::new((types.len() - 1) as f64).unwrap().cdf(stat);
    assert!(p > 1e-3, "chi-square {stat}, p = {p}");
}

#[test]
fn fitted_frequencies_are_consistent() {
    let (model, _, _) = fixture("instance1.json");
    let truth = mixture_of(&model.law).types();
    let m = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let values: Vec<Vec<f64>> = (0..m).map(|_| model.sample_impression(&mut rng).values).collect();
    let penalties: Vec<f64> = model.advertisers.iter().map(|a| a.penalty).collect();
    let fitted = fit_mixture(&membership_samples(&values), &penalties).unwrap();
    for t in truth {
        let f = fitted.types().iter().find(|f| f.members == t.members).expect("type recovered");
        let sigma = (t.probability * (1.0 - t.probability) / m as f64).sqrt();
        assert!((f.probability - t.probability).abs() <= 3.0 * sigma, "{:?}: {} vs {}", t.members, f.probability, t.probability);
        for (mu_hat, mu) in f.log_mean.iter().zip(&t.log_mean) {
            assert!((mu_hat - mu).abs() < 0.05, "{:?}: log mean {mu_hat} vs {mu}", t.members);
        }
    }
}

#[test]
fn analytic_dual_agrees_with_sample_average() {
    let (model, _, _) = fixture("instance1.json");
    let null = RevenueCurve::null();
    let opts = SolveOptions::default();
    let analytic = solve_dual(&model, &null, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let samples: Vec<QualityVector> = (0..100_000).map(|_| model.sample_impression(&mut rng)).collect();
    let saa = solve_dual_saa(&samples, &model.rho(), &null, &opts).unwrap();
    for (a, b) in analytic.v.iter().zip(&saa.v) {
        assert_relative_eq!(*a, *b, max_relative = 2e-2);
    }
}

#[test]
fn winner_masses_match_monte_carlo() {
    let (model, _, _) = fixture("instance1.json");
    let null = RevenueCurve::null();
    let opts = SolveOptions::default();
    let sol = solve_dual(&model, &null, &opts).unwrap();
    let draws = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    let everyone = Active::all(model.len());
    let mut adjusted = vec![0.0; model.len()];
    for _ in 0..draws {
        let q = model.sample_impression(&mut rng).values;
        for a in 0..q.len() {
            adjusted[a] = model.gamma * q[a] - sol.v[a];
        }
        *counts.entry(argmax_set(&adjusted, &everyone).1).or_default() += 1.0;
    }
    let table = &sol.evaluation.table;
    let sets: Vec<u64> = counts.keys().copied().chain(table.iter().map(|(w, _)| w)).collect();
    for set in sets {
        let p_hat = counts.get(&set).copied().unwrap_or(0.0) / draws as f64;
        let p = table.get(set).kept;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt().max(1.0 / draws as f64);
        assert!((p_hat - p).abs() <= 3.0 * sigma + 1e-9, "set {set:b}: mc {p_hat} vs table {p}");
    }
}

/// Exact expected yield of the bid price 0.5 on one advertiser with
/// uniform qualities and no exchange: impressions above the price (mean
/// 0.75) are taken until `c` are delivered, the rest are discarded unless
/// every remaining impression is committed (mean 0.5).
fn uniform_policy_expectation(n: usize, c: usize) -> f64 {
    let mut prev = vec![0.0; c + 1];
    for r in 1..=n {
        let mut cur = vec![0.0; c + 1];
        for k in 1..=c.min(r) {
            cur[k] = if k == r { 0.5 * r as f64 } else { 0.5 * (0.75 + prev[k - 1]) + 0.5 * prev[k] };
        }
        prev = cur;
    }
    prev[c]
}

#[test]
fn uniform_policy_yield_matches_exact_expectation() {
    let (model, exchange, _) = fixture("uniform.json");
    let policy = PolicyConfig { v: vec![0.5], ..Default::default() };
    let n = 10_000;
    let runs = simulate_replications(&model, &exchange, &policy, n, 200, 21).unwrap();
    let per: Vec<f64> = runs.iter().map(|o| o.total_yield / n as f64).collect();
    let (mean, se) = mean_and_standard_error(&per);
    let exact = uniform_policy_expectation(n as usize, n as usize / 2) / n as f64;
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} +- {se} against {exact}");
    // the finite horizon costs at most 1/sqrt(N) relative to the dual value
    assert!(exact <= 0.375 && exact >= 0.375 * (1.0 - 1.0 / (n as f64).sqrt()), "{exact}");
    assert_relative_eq!(dap_upper_bound(&model, &exchange, &[0.5], 100).unwrap(), 37.5, max_relative = 1e-6);
}

#[test]
fn quantile_estimator_is_never_more_efficient() {
    let families = [QualityFamily::Exponential { mean: 1.0 }, QualityFamily::Normal { mean: 0.0, sd: 1.0 }];
    for family in families {
        for rho in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let row = &estimator_efficiency(family, rho, &[1000], 4000, 31).unwrap()[0];
            assert!(row.analytic >= 1.0 - 1e-12);
            assert!(row.ratio >= 0.9, "{family:?} rho {rho}: ratio {}", row.ratio);
        }
    }
}

#[test]
fn degenerate_fits_still_score() {
    let (model, _, _) = fixture("instance1.json");
    let rows = compare_pd(&model, &[model.len()], 4, 41, &SolveOptions::default()).unwrap();
    for r in rows {
        assert!(r.est_mean.is_finite() && r.pd_mean.is_finite(), "{r:?}");
        assert!(r.est_mean <= r.opt + 1e-6 * r.opt.abs() && r.pd_mean <= r.opt + 1e-6 * r.opt.abs(), "{r:?}");
    }
}
