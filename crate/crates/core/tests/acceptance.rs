//! Acceptance suite: one PASS/FAIL line per criterion. Pass criterion
//! numbers as arguments to run a subset.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use adyield::dual::{dual_derivatives, dual_objective, solve_dual, SolveOptions};
use adyield::exchange::{BidLaw, BidModel, Bypass, Price, Response};
use adyield::experiments::{compare_pd, estimator_efficiency, pareto_sweep, regret_experiment, QualityFamily};
use adyield::fluid::fluid_evaluate;
use adyield::market::{Marginal, MarketModel, QualityLaw};
use adyield::policy::{
    capacities, dap_upper_bound, dp_solve, mean_and_standard_error, optimal_policy, simulate_replications, PolicyConfig,
    DEFAULT_STATE_BUDGET,
};
use adyield::tiebreak::{solve_tiebreak_flow, TieTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Criterion {
    number: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn main() {
    let criteria = [
        Criterion { number: 1, name: "exchange response laws", limit: secs(5), run: exchange_response_laws },
        Criterion { number: 2, name: "dual derivatives against finite differences", limit: secs(120), run: dual_gradient },
        Criterion { number: 3, name: "single-advertiser quantile", limit: secs(30), run: quantile_identity },
        Criterion { number: 4, name: "simulation <= DP <= deterministic bound", limit: secs(300), run: dp_sandwich },
        Criterion { number: 5, name: "regret below K/sqrt(N)", limit: secs(120), run: regret_bound },
        Criterion { number: 6, name: "left-over regime tail", limit: secs(120), run: leftover_tail },
        Criterion { number: 7, name: "exact delivery", limit: None, run: exact_delivery },
        Criterion { number: 8, name: "tie-flow feasibility", limit: None, run: tie_flow },
        Criterion { number: 9, name: "fluid against simulation", limit: None, run: fluid_consistency },
        Criterion { number: 10, name: "estimator efficiency", limit: secs(300), run: efficiency },
        Criterion { number: 11, name: "quality/revenue frontier", limit: None, run: pareto },
        Criterion { number: 12, name: "fitted against sample-average prices", limit: None, run: parametric_vs_pd },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.number)) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed <= l);
        let pass = result.pass && in_time;
        let limit = c.limit.map_or(String::new(), |l| format!(" of {}s", l.as_secs()));
        println!(
            "criterion {:>2} {}: {} [{:.1}s{}] {}",
            c.number,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit,
            result.detail
        );
        if !pass {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

// 1 -----------------------------------------------------------------------

fn exchange_response_laws() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut r = rng(1);
    let mut violations = Vec::new();
    let mut pairs = 0;
    for _ in 0..50 {
        let bids = random_bid_model(&mut r);
        let curve = curve(&bids);
        let scale = 3.0;
        for _ in 0..20 {
            pairs += 1;
            let c1 = r.gen_range(0.0..scale);
            let c2 = c1 + r.gen_range(1e-6..scale);
            let (a, b, m) = (curve.respond(c1), curve.respond(c2), curve.respond(0.5 * (c1 + c2)));
            let checks = [
                ("R non-decreasing", b.value >= a.value - TOL),
                ("R - c non-increasing", b.value - c2 <= a.value - c1 + TOL),
                ("s* non-increasing", b.survival <= a.survival + TOL),
                ("p* non-decreasing", b.reserve_price.as_f64() >= a.reserve_price.as_f64() - TOL),
                ("R convex", m.value <= 0.5 * (a.value + b.value) + TOL),
            ];
            for (name, ok) in checks {
                if !ok {
                    violations.push(format!("{name} for {bids:?} at c = {c1}, {c2}"));
                }
            }
        }
    }
    let uniform = curve(&BidModel::SingleBidder { law: BidLaw::Uniform { low: 0.0, high: 1.0 } });
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let c = i as f64 / 100.0;
        let x = uniform.respond(c);
        // At c = 1 nothing is sold, and rejecting every bid is the same price.
        let price_error = match x.reserve_price {
            Price::Finite(p) => (p - (1.0 + c) / 2.0).abs(),
            Price::RejectAll if c >= 1.0 => 0.0,
            Price::RejectAll => f64::INFINITY,
        };
        worst = worst
            .max((x.survival - (1.0 - c) / 2.0).abs())
            .max(price_error)
            .max((x.value - (1.0 + c).powi(2) / 4.0).abs());
    }
    let pass = violations.is_empty() && worst <= 1e-6;
    outcome(pass, format!("{pairs} pairs, {} violations {:?}; uniform closed-form error {worst:.2e}", violations.len(), violations.first()))
}

// 2 -----------------------------------------------------------------------

fn dual_gradient() -> Outcome {
    const H: f64 = 1e-4;
    let mut r = rng(2);
    let exponential = curve(&BidModel::SingleBidder { law: BidLaw::Exponential { rate: 1.5 } });
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    let mut worst_case = String::new();
    for inst in 0..200 {
        let a = r.gen_range(1..=4);
        let t = r.gen_range(1..=6);
        let mixture = random_mixture(&mut r, a, t);
        let rho = random_rho(&mut r, a, 0.9, 0.02);
        let model = model(&rho, 0.0, QualityLaw::Mixture(mixture));
        let response: &dyn Response = if inst % 2 == 0 { &Bypass } else { &exponential };
        let v: Vec<f64> = (0..a).map(|_| r.gen_range(0.0..1.5)).collect();
        let eval = dual_derivatives(&model, response, &v).expect("evaluates");
        if eval.is_nonsmooth() {
            skipped += 1;
            continue;
        }
        let psi = |x: &[f64]| dual_objective(&model, response, x).expect("evaluates");
        let mut dirs: Vec<Vec<f64>> = (0..a).map(|i| (0..a).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        let random: Vec<f64> = (0..a).map(|_| r.gen_range(-1.0..1.0)).collect();
        let norm = random.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        dirs.push(random.iter().map(|x| x / norm).collect());
        for d in dirs {
            let plus: Vec<f64> = v.iter().zip(&d).map(|(x, y)| x + H * y).collect();
            let minus: Vec<f64> = v.iter().zip(&d).map(|(x, y)| x - H * y).collect();
            let fd = (psi(&plus) - psi(&minus)) / (2.0 * H);
            let analytic: f64 = d.iter().zip(&eval.forward).map(|(x, g)| x * g).sum();
            let rel = (fd - analytic).abs() / analytic.abs().max(1e-2);
            checked += 1;
            if rel > worst {
                worst = rel;
                worst_case = format!("instance {inst}: fd {fd:.8} analytic {analytic:.8}");
            }
        }
    }
    outcome(worst <= 1e-3, format!("{checked} directions, {skipped} tie points skipped, worst relative error {worst:.2e} ({worst_case})"))
}

// 3 -----------------------------------------------------------------------

type Quantile = Box<dyn Fn(f64) -> f64>;

fn quantile_identity() -> Outcome {
    let z = |p: f64| Normal::new(0.0, 1.0).unwrap().inverse_cdf(p);
    let laws: [(Marginal, Quantile); 3] = [
        (Marginal::Uniform { low: 0.0, high: 2.0 }, Box::new(|rho| 2.0 * (1.0 - rho))),
        (Marginal::Exponential { rate: 0.5 }, Box::new(|rho: f64| -rho.ln() / 0.5)),
        (Marginal::LogNormal { mu: 0.3, sigma: 0.6 }, Box::new(move |rho| (0.3 + 0.6 * z(1.0 - rho)).exp())),
    ];
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for (marginal, oracle) in &laws {
        for rho in [0.1, 0.5, 0.9] {
            let m = model(&[rho], 0.0, QualityLaw::Independent(vec![*marginal]));
            let s = solve_dual(&m, &Bypass, &opts()).expect("solves");
            let err = (s.v[0] - oracle(rho)).abs();
            worst = worst.max(err);
            if err > 1e-3 {
                lines.push(format!("{marginal:?} rho {rho}: {} vs {}", s.v[0], oracle(rho)));
            }
        }
    }
    outcome(worst <= 1e-3, format!("9 cases, worst |v - quantile| {worst:.2e} {lines:?}"))
}

// 4 -----------------------------------------------------------------------

fn dp_sandwich() -> Outcome {
    let mut r = rng(4);
    let mut failures = Vec::new();
    let mut tightest = f64::INFINITY;
    for inst in 0..50 {
        let a = r.gen_range(1..=2);
        let k = r.gen_range(2..=4);
        let atoms = random_atoms(&mut r, a, k);
        let n = r.gen_range(4..=12);
        // integer capacities first, so that rho_a N is exactly C_a
        let caps: Vec<u64> = capacities(&random_rho(&mut r, a, 0.8, 0.1), n).iter().map(|c| (*c).max(1)).collect();
        let rho: Vec<f64> = caps.iter().map(|c| *c as f64 / n as f64).collect();
        let bids = if r.gen_bool(0.25) {
            BidModel::Null
        } else {
            let k = r.gen_range(1..=2);
            let mut values: Vec<f64> = (0..k).map(|_| r.gen_range(1..=10) as f64 / 10.0).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            let probs = vec![1.0 / values.len() as f64; values.len()];
            BidModel::SingleBidder { law: BidLaw::Discrete { values, probs } }
        };
        let model = model(&rho, 0.5, QualityLaw::Atoms(atoms));
        let exchange = curve(&bids);
        let dp = dp_solve(&model, &bids, n, &caps, DEFAULT_STATE_BUDGET).expect("dp solves");
        let (solution, policy) = optimal_policy(&model, &exchange, &opts()).expect("policy");
        let bound = dap_upper_bound(&model, &exchange, &solution.v, n).expect("bound");
        let runs = simulate_replications(&model, &exchange, &policy, n, 10_000, 400 + inst).expect("simulates");
        let yields: Vec<f64> = runs.iter().map(|o| o.total_yield).collect();
        let (mean, se) = mean_and_standard_error(&yields);
        let left = mean <= dp.value + 3.0 * se + 1e-9;
        let right = dp.value <= bound + 1e-9;
        tightest = tightest.min((dp.value + 3.0 * se - mean) / se.max(1e-12));
        if !(left && right) {
            failures.push(format!("instance {inst}: sim {mean:.4} +- {se:.4}, dp {:.4}, bound {bound:.4}", dp.value));
        }
    }
    outcome(failures.is_empty(), format!("50 instances, {} violations {:?}; smallest margin {tightest:.2} SE", failures.len(), failures.first()))
}

// 5 -----------------------------------------------------------------------

fn regret_bound() -> Outcome {
    let (model, exchange, _) = fixture("uniform.json");
    let rows = regret_experiment(&model, &exchange, &[100, 10_000], 500, 5, &opts()).expect("runs");
    let below = rows.iter().all(|row| row.mean_regret <= row.bound);
    let decreasing = rows[1].mean_regret < rows[0].mean_regret;
    let text: Vec<String> = rows.iter().map(|r| format!("N={} regret {:.5} +- {:.5} bound {:.5}", r.n, r.mean_regret, r.band, r.bound)).collect();
    outcome(below && decreasing, text.join("; "))
}

// 6 -----------------------------------------------------------------------

fn leftover_tail() -> Outcome {
    let (model, exchange, _) = fixture("uniform.json");
    let (_, policy) = optimal_policy(&model, &exchange, &opts()).expect("policy");
    let mut shares = model.rho();
    shares.push(model.outside_rho());
    let mut pass = true;
    let mut text = Vec::new();
    for n in [1_000u64, 10_000] {
        let runs = simulate_replications(&model, &exchange, &policy, n, 10_000, 6 + n).expect("simulates");
        let hits = runs.iter().filter(|o| (n - o.leftover_onset) as f64 >= 0.1 * n as f64).count();
        let empirical = hits as f64 / runs.len() as f64;
        let bound: f64 = shares.iter().map(|r| (-0.02 * r * n as f64).exp()).sum();
        pass &= empirical <= bound;
        text.push(format!("N={n}: P = {empirical:.2e} ({hits} hits) vs bound {bound:.2e}"));
    }
    outcome(pass, text.join("; "))
}

// 7 -----------------------------------------------------------------------

fn delivery_fixtures() -> Vec<(String, MarketModel, Box<dyn Response>)> {
    let mut out: Vec<(String, MarketModel, Box<dyn Response>)> = Vec::new();
    for name in ["uniform.json", "atoms.json", "instance1.json"] {
        let (m, e, _) = fixture(name);
        out.push((name.into(), m, Box::new(e)));
    }
    let (m, _, _) = fixture("instance1.json");
    out.push(("instance 1 without exchange".into(), m.clone(), Box::new(Bypass)));
    out.push(("instance 1 at full capacity".into(), m.with_rho(&[0.3, 0.4, 0.3]).unwrap(), Box::new(Bypass)));
    let uniform_bids = curve(&BidModel::SingleBidder { law: BidLaw::Uniform { low: 0.0, high: 1.0 } });
    out.push((
        "two uniform advertisers".into(),
        model(&[0.3, 0.4], 0.0, QualityLaw::Independent(vec![Marginal::Uniform { low: 0.0, high: 1.0 }; 2])),
        Box::new(uniform_bids.clone()),
    ));
    out.push((
        "exponential qualities, second-price exchange".into(),
        model(
            &[0.2, 0.1, 0.3],
            0.0,
            QualityLaw::Independent(vec![
                Marginal::Exponential { rate: 1.0 },
                Marginal::Exponential { rate: 2.0 },
                Marginal::LogNormal { mu: 0.0, sigma: 0.5 },
            ]),
        ),
        Box::new(curve(&BidModel::SecondPrice { law: BidLaw::Exponential { rate: 1.0 }, bidders: 3 })),
    ));
    let mut r = rng(7);
    for k in 0..3 {
        let atoms = random_atoms(&mut r, 3, 6);
        let rho = random_rho(&mut r, 3, 0.95, 0.05);
        out.push((format!("random atoms {k}"), model(&rho, 0.3, QualityLaw::Atoms(atoms)), Box::new(uniform_bids.clone())));
    }
    out
}

fn exact_delivery() -> Outcome {
    let mut runs_total = 0;
    let mut violations = Vec::new();
    for (i, (name, model, exchange)) in delivery_fixtures().into_iter().enumerate() {
        let (_, policy) = optimal_policy(&model, exchange.as_ref(), &opts()).expect("policy");
        let n = 997 + 101 * i as u64;
        let runs = simulate_replications(&model, exchange.as_ref(), &policy, n, 1_000, 70 + i as u64).expect("simulates");
        let caps = capacities(&model.rho(), n);
        for o in &runs {
            runs_total += 1;
            if o.delivered != caps {
                violations.push(format!("{name} rep {}: delivered {:?}, owed {caps:?}", o.rep, o.delivered));
            }
        }
    }
    outcome(violations.is_empty(), format!("{runs_total} runs over 10 fixtures, {} violations {:?}", violations.len(), violations.first()))
}

// 8 -----------------------------------------------------------------------

fn tie_flow() -> Outcome {
    let mut r = rng(8);
    let mut failures = Vec::new();
    let (mut worst_delivery, mut worst_supply, mut with_ties) = (0.0f64, 0.0f64, 0);
    for inst in 0..100 {
        let a = r.gen_range(2..=4);
        let k = r.gen_range(3..=8);
        let atoms = random_atoms(&mut r, a, k);
        let rho = random_rho(&mut r, a, 0.95, 0.02);
        let m = model(&rho, 0.5, QualityLaw::Atoms(atoms));
        let exchange: Box<dyn Response> = match inst % 3 {
            0 => Box::new(Bypass),
            1 => Box::new(curve(&BidModel::SingleBidder { law: BidLaw::Uniform { low: 0.0, high: 1.0 } })),
            _ => Box::new(curve(&BidModel::SingleBidder { law: BidLaw::Discrete { values: vec![0.3, 0.7], probs: vec![0.5, 0.5] } })),
        };
        let solution = solve_dual(&m, exchange.as_ref(), &opts()).expect("solves");
        let table = TieTable::from_events(&solution.evaluation.table);
        if table.multi_member().next().is_some() {
            with_ties += 1;
        }
        match solve_tiebreak_flow(&table, &rho, 1e-9) {
            Ok(rule) => {
                worst_delivery = worst_delivery.max(rule.delivery_residual);
                worst_supply = worst_supply.max(rule.supply_residual);
            }
            Err(e) => failures.push(format!("instance {inst}: {e}")),
        }
    }
    let pass = failures.is_empty() && worst_delivery <= 1e-9 && worst_supply <= 1e-9;
    outcome(
        pass,
        format!(
            "100 instances ({with_ties} with ties), {} infeasible {:?}; residuals {worst_delivery:.1e} / {worst_supply:.1e}",
            failures.len(),
            failures.first()
        ),
    )
}

// 9 -----------------------------------------------------------------------

fn fluid_consistency() -> Outcome {
    const N: u64 = 100_000;
    const REPS: u64 = 20;
    let fixtures = delivery_fixtures();
    let picks = ["uniform.json", "atoms.json", "instance1.json", "two uniform advertisers", "exponential qualities, second-price exchange"];
    let mut pass = true;
    let mut text = Vec::new();
    for (i, name) in picks.iter().enumerate() {
        let (_, model, exchange) = fixtures.iter().find(|f| f.0 == *name).expect("fixture");
        let exchange = exchange.as_ref();
        let (solution, policy) = optimal_policy(model, exchange, &opts()).expect("policy");
        let at_optimum = fluid_evaluate(model, exchange, &policy, &Default::default()).expect("fluid");
        let psi = solution.evaluation.objective;
        let gap = (at_optimum.total_yield - psi).abs() / psi.abs();

        // Lowered prices make every contract fill strictly before the end,
        // at separate times, away from the critical point at `v*`.
        let scale = solution.v.iter().map(|x| x.abs()).fold(0.0, f64::max).max(0.1);
        let v: Vec<f64> = solution.v.iter().enumerate().map(|(a, x)| x - scale * (0.05 + 0.04 * a as f64)).collect();
        let perturbed = PolicyConfig { v, tiebreak: policy.tiebreak.clone() };
        let f = fluid_evaluate(model, exchange, &perturbed, &Default::default()).expect("fluid");
        let runs = simulate_replications(model, exchange, &perturbed, N, REPS, 90 + i as u64).expect("simulates");
        let per: Vec<f64> = runs.iter().map(|o| o.total_yield / N as f64).collect();
        let (mean, se) = mean_and_standard_error(&per);
        let z = (mean - f.total_yield).abs() / se;
        let ok = z <= 3.0 && gap <= 1e-3;
        pass &= ok;
        let fills: Vec<String> = f.pieces.iter().map(|p| format!("{:.3}", p.end)).collect();
        text.push(format!("{name}: |MC - J| = {z:.2} SE, gap {gap:.1e}, epochs [{}]", fills.join(" ")));
    }
    outcome(pass, text.join("; "))
}

// 10 ----------------------------------------------------------------------

fn efficiency() -> Outcome {
    let cases = [
        (QualityFamily::Exponential { mean: 1.0 }, 0.2032, Some(1.544)),
        (QualityFamily::Exponential { mean: 1.0 }, 0.5, None),
        (QualityFamily::Normal { mean: 0.0, sd: 1.0 }, 0.5, Some(std::f64::consts::FRAC_PI_2)),
    ];
    let mut pass = true;
    let mut text = Vec::new();
    for (i, (family, rho, published)) in cases.into_iter().enumerate() {
        let row = &estimator_efficiency(family, rho, &[1_000], 10_000, 10 + i as u64).expect("runs")[0];
        let analytic_ok = published.is_none_or(|p| (row.analytic - p).abs() <= 1e-3);
        let rel = (row.ratio - row.analytic).abs() / row.analytic;
        pass &= analytic_ok && rel <= 0.1;
        text.push(format!("{family:?} rho {rho}: ratio {:.4} vs {:.4} ({:.1}%)", row.ratio, row.analytic, 100.0 * rel));
    }
    outcome(pass, text.join("; "))
}

// 11 ----------------------------------------------------------------------

fn pareto() -> Outcome {
    const TOL: f64 = 1e-6;
    let (model, exchange, _) = fixture("instance1.json");
    let grid = [0.0, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0];
    let points = pareto_sweep(&model, &exchange, &grid, &opts()).expect("sweeps");
    let (finite, anchor) = points.split_at(points.len() - 1);
    let mut issues = Vec::new();
    for w in finite.windows(2) {
        if w[1].quality < w[0].quality * (1.0 - TOL) {
            issues.push(format!("quality falls from gamma {} to {}", w[0].gamma, w[1].gamma));
        }
        if w[1].revenue > w[0].revenue * (1.0 + TOL) + TOL {
            issues.push(format!("revenue rises from gamma {} to {}", w[0].gamma, w[1].gamma));
        }
    }
    for p in finite {
        let y = p.yield_value.unwrap_or(f64::NAN);
        if y != p.revenue + p.gamma * p.quality {
            issues.push(format!("yield identity at gamma {}", p.gamma));
        }
    }
    let max_quality = finite.iter().map(|p| p.quality).fold(f64::MIN, f64::max);
    if anchor[0].quality < max_quality * (1.0 - TOL) {
        issues.push(format!("baseline quality {} below {max_quality}", anchor[0].quality));
    }
    let first = &finite[0];
    let last = &finite[finite.len() - 1];
    outcome(
        issues.is_empty() && finite.len() == 10,
        format!(
            "{} grid points; quality {:.2} -> {:.2} -> {:.2} (baseline), revenue {:.2} -> {:.2} -> {:.2} {issues:?}",
            finite.len(),
            first.quality,
            last.quality,
            anchor[0].quality,
            first.revenue,
            last.revenue,
            anchor[0].revenue
        ),
    )
}

// 12 ----------------------------------------------------------------------

fn parametric_vs_pd() -> Outcome {
    let (model, _, _) = fixture("instance1.json");
    let rows = compare_pd(&model, &[100, 1_000, 10_000], 30, 12, &opts()).expect("runs");
    let mut issues = Vec::new();
    for row in &rows {
        if row.est_mean < row.pd_mean {
            issues.push(format!("M={}: est {} < pd {}", row.m, row.est_mean, row.pd_mean));
        }
    }
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if (b.opt - b.est_mean) >= (a.opt - a.est_mean) || (b.opt - b.pd_mean) >= (a.opt - a.pd_mean) {
            issues.push(format!("gap does not shrink from M={} to M={}", a.m, b.m));
        }
        if b.est_std >= a.est_std || b.pd_std >= a.pd_std {
            issues.push(format!("spread does not shrink from M={} to M={}", a.m, b.m));
        }
    }
    let text: Vec<String> = rows
        .iter()
        .map(|r| format!("M={}: est {:.2} ({:.2}) pd {:.2} ({:.2})", r.m, r.est_mean, r.est_std, r.pd_mean, r.pd_std))
        .collect();
    outcome(issues.is_empty(), format!("opt {:.2}; {} {issues:?}", rows[0].opt, text.join("; ")))
}
