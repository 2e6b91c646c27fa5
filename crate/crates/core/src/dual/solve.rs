use serde::{Deserialize, Serialize};

use super::eval::{DualEvaluation, DualProblem};
use crate::error::Result;
use crate::exchange::Response;
use crate::market::events::{winner_indices, TIE_TOLERANCE};
use crate::market::{Atoms, EventOptions, MarketModel, QualityLaw};

/// Settings for [`solve_dual`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stationarity tolerance on one-sided derivatives.
    pub tolerance: f64,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    /// Curvature constant of the line search.
    pub curvature: f64,
    pub max_line_steps: usize,
    pub events: EventOptions,
    /// Starting point; zero when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 500,
            tolerance: 1e-9,
            armijo: 1e-4,
            curvature: 0.5,
            max_line_steps: 80,
            events: EventOptions::default(),
            initial: None,
        }
    }
}

/// Result of a dual solve.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub v: Vec<f64>,
    pub evaluation: DualEvaluation,
    pub converged: bool,
    pub iterations: usize,
}

/// Serializable summary of a solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl DualSolution {
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary { objective: self.evaluation.objective, converged: self.converged, iterations: self.iterations }
    }
}

/// Minimizes the dual for the model's yield-weighted qualities.
pub fn solve_dual(model: &MarketModel, response: &dyn Response, opts: &SolveOptions) -> Result<DualSolution> {
    let problem = DualProblem::new(model, response, opts.events)?;
    solve_problem(&problem, opts)
}

/// Quasi-Newton steps while the objective is smooth, then exact line
/// searches along subset directions `+-1_S` until every one-sided
/// derivative is non-negative.
pub fn solve_problem(problem: &DualProblem, opts: &SolveOptions) -> Result<DualSolution> {
    let n = problem.dimension();
    let mut v = opts.initial.clone().unwrap_or_else(|| vec![0.0; n]);
    for a in 0..n {
        if !problem.active.contains(a) {
            v[a] = 0.0;
        }
    }
    let mut eval = problem.evaluate(&v)?;
    let mut iterations = 0;
    if !problem.law.is_discrete() {
        let (e, it) = quasi_newton(problem, eval, opts)?;
        eval = e;
        iterations += it;
    }
    while iterations < opts.max_iters {
        let Some((set, sign, slope)) = eval.steepest_subset(opts.tolerance) else {
            break;
        };
        iterations += 1;
        log::trace!("subset step along {set:#b} sign {sign} slope {slope}");
        eval = exact_line_search(problem, &eval, set, sign, opts)?;
    }
    let converged = eval.is_stationary(opts.tolerance);
    if !converged {
        log::warn!("dual solve stopped after {iterations} iterations without reaching stationarity");
    }
    Ok(DualSolution { v: eval.v.clone(), evaluation: eval, converged, iterations })
}

fn active_gradient(problem: &DualProblem, eval: &DualEvaluation) -> Vec<f64> {
    (0..problem.dimension()).map(|a| if problem.active.contains(a) { eval.forward[a] } else { 0.0 }).collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Directional derivative along `d`, from the one-sided coordinate
/// derivatives (exact where the objective is smooth).
fn slope_along(eval: &DualEvaluation, d: &[f64]) -> f64 {
    d.iter()
        .enumerate()
        .map(|(a, &x)| if x >= 0.0 { x * eval.forward[a] } else { -x * eval.backward[a] })
        .sum()
}

fn quasi_newton(problem: &DualProblem, mut eval: DualEvaluation, opts: &SolveOptions) -> Result<(DualEvaluation, usize)> {
    let n = problem.dimension();
    let mut h: Vec<f64> = identity(n);
    let mut scaled = false;
    let mut it = 0;
    while it < opts.max_iters {
        if eval.is_nonsmooth() || eval.is_stationary(opts.tolerance) {
            break;
        }
        it += 1;
        let g = active_gradient(problem, &eval);
        let mut d: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>()).collect();
        if dot(&g, &d) >= 0.0 {
            h = identity(n);
            scaled = false;
            d = g.iter().map(|x| -x).collect();
        }
        let next = wolfe_search(problem, &eval, &d, opts)?;
        let Some(next) = next else {
            break;
        };
        let s: Vec<f64> = next.v.iter().zip(&eval.v).map(|(a, b)| a - b).collect();
        let g1 = active_gradient(problem, &next);
        let y: Vec<f64> = g1.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if !scaled {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|x| *x *= scale);
                scaled = true;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        eval = next;
    }
    Ok((eval, it))
}

fn identity(n: usize) -> Vec<f64> {
    (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect()
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

fn shifted(v: &[f64], d: &[f64], t: f64) -> Vec<f64> {
    v.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Line search with the Armijo condition and a curvature condition. A trial
/// point whose directional derivative is non-positive is also accepted when
/// the Armijo test fails: by convexity it cannot have increased the
/// objective, so the failure is rounding noise.
fn wolfe_search(problem: &DualProblem, eval: &DualEvaluation, d: &[f64], opts: &SolveOptions) -> Result<Option<DualEvaluation>> {
    let slope0 = slope_along(eval, d);
    if slope0 >= 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let (mut slope_lo, mut slope_hi) = (slope0, f64::NAN);
    let mut t = 1.0;
    let mut best: Option<DualEvaluation> = None;
    for _ in 0..opts.max_line_steps {
        let trial = problem.evaluate(&shifted(&eval.v, d, t))?;
        let slope = slope_along(&trial, d);
        let armijo = trial.objective <= eval.objective + opts.armijo * t * slope0;
        let decreased = armijo || slope <= 0.0;
        if decreased && slope.abs() <= opts.curvature * slope0.abs() {
            return Ok(Some(trial));
        }
        if decreased && best.as_ref().is_none_or(|b| trial.objective < b.objective) {
            best = Some(trial.clone());
        }
        if decreased && slope < 0.0 {
            lo = t;
            slope_lo = slope;
        } else {
            hi = t;
            slope_hi = slope;
        }
        t = if hi.is_infinite() {
            2.0 * t
        } else if slope_hi.is_finite() && slope_hi > slope_lo {
            // secant step on the monotone derivative, kept inside the bracket
            let secant = lo - slope_lo * (hi - lo) / (slope_hi - slope_lo);
            secant.clamp(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo))
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(best)
}

/// Right derivative of the objective along a fixed subset direction, per
/// atom: each atom keeps its best in-set and best out-of-set adjusted
/// quality, so a trial step costs one pass without rebuilding event tables.
struct AtomLine {
    weights: Vec<f64>,
    inside: Vec<f64>,
    outside: Vec<f64>,
    rho: f64,
    sign: f64,
}

impl AtomLine {
    fn new(problem: &DualProblem, atoms: &Atoms, v: &[f64], set: u64, sign: f64) -> AtomLine {
        let n = atoms.len();
        let (mut weights, mut inside, mut outside) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (w, q) in atoms.iter() {
            if w == 0.0 {
                continue;
            }
            let mut a_in = f64::NEG_INFINITY;
            let mut a_out = if problem.active.outside { 0.0 } else { f64::NEG_INFINITY };
            for a in problem.active.indices() {
                let x = q[a] - v[a];
                if set & (1u64 << a) != 0 {
                    a_in = a_in.max(x);
                } else {
                    a_out = a_out.max(x);
                }
            }
            weights.push(w);
            inside.push(a_in);
            outside.push(a_out);
        }
        let rho = winner_indices(set).map(|a| problem.rho[a]).sum();
        AtomLine { weights, inside, outside, rho, sign }
    }

    fn slope(&self, response: &dyn Response, t: f64) -> f64 {
        let mut kept = 0.0;
        for ((w, a), b) in self.weights.iter().zip(&self.inside).zip(&self.outside) {
            if self.sign > 0.0 {
                let lambda = a - t;
                if lambda - b > TIE_TOLERANCE {
                    kept += w * (1.0 - response.respond(lambda).survival_max);
                }
            } else {
                let raised = a + t;
                if raised >= b - TIE_TOLERANCE {
                    kept += w * (1.0 - response.respond(raised.max(*b)).survival);
                }
            }
        }
        if self.sign > 0.0 {
            self.rho - kept
        } else {
            kept - self.rho
        }
    }

    /// Step lengths at which an atom's winner changes or its opportunity
    /// cost crosses an exchange kink.
    fn breakpoints(&self, kinks: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        for (a, b) in self.inside.iter().zip(&self.outside) {
            if !a.is_finite() {
                continue;
            }
            if self.sign > 0.0 {
                out.push(a - b);
                out.extend(kinks.iter().map(|k| a - k));
            } else {
                out.push(b - a);
                out.extend(kinks.iter().map(|k| k - a));
            }
        }
        out.retain(|t| t.is_finite() && *t > 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| *x - *y <= 1e-12 * y.abs().max(1.0));
        out
    }

    /// Exact minimizer along the ray: the first breakpoint after which the
    /// slope is non-negative. The slope is monotone, and is probed at
    /// region midpoints so no atom sits near a tie when it is evaluated.
    fn minimizer(&self, response: &dyn Response) -> Option<f64> {
        let bps = self.breakpoints(&response.kinks());
        let last = *bps.last()?;
        let probe = |i: usize| {
            let t = match i {
                0 => 0.5 * bps[0],
                i if i < bps.len() => 0.5 * (bps[i - 1] + bps[i]),
                _ => last + last.max(1.0),
            };
            self.slope(response, t)
        };
        let (mut lo, mut hi) = (0, bps.len());
        if probe(hi) < 0.0 || probe(0) >= 0.0 {
            return None;
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if probe(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(bps[hi - 1])
    }
}

/// Minimizes along the ray `v + t * sign * 1_set` by bisection on the
/// right derivative; lands on kinks of piecewise-linear objectives.
fn exact_line_search(problem: &DualProblem, eval: &DualEvaluation, set: u64, sign: f64, opts: &SolveOptions) -> Result<DualEvaluation> {
    let n = problem.dimension();
    let d: Vec<f64> = (0..n).map(|a| if set & (1u64 << a) != 0 { sign } else { 0.0 }).collect();
    let line = match &problem.law {
        QualityLaw::Atoms(atoms) => Some(AtomLine::new(problem, atoms, &eval.v, set, sign)),
        _ => None,
    };
    if let Some(t) = line.as_ref().and_then(|l| l.minimizer(problem.response)) {
        return problem.evaluate(&shifted(&eval.v, &d, t));
    }
    let slope_at = |t: f64| -> Result<(f64, Option<DualEvaluation>)> {
        match &line {
            Some(l) => Ok((l.slope(problem.response, t), None)),
            None => {
                let e = problem.evaluate(&shifted(&eval.v, &d, t))?;
                let s = if sign > 0.0 { e.forward_along(set) } else { e.backward_along(set) };
                Ok((s, Some(e)))
            }
        }
    };
    let scale = eval.v.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let mut lo = 0.0;
    let mut hi = 1e-3 * scale;
    let (mut slope_hi, mut at_hi) = slope_at(hi)?;
    let mut steps = 0;
    while slope_hi < 0.0 && steps < 200 {
        lo = hi;
        hi *= 2.0;
        (slope_hi, at_hi) = slope_at(hi)?;
        steps += 1;
    }
    for _ in 0..opts.max_line_steps.max(200) {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let (s, e) = slope_at(mid)?;
        if s < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            at_hi = e;
        }
    }
    match at_hi {
        Some(e) => Ok(e),
        None => problem.evaluate(&shifted(&eval.v, &d, hi)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::RevenueCurve;
    use crate::market::{Advertiser, Atoms, Marginal, QualityLaw};

    fn one(rho: f64, law: QualityLaw) -> MarketModel {
        MarketModel::new(vec![Advertiser { id: 1, rho, penalty: 0.0, quality_floor: None }], law, 1.0).unwrap()
    }

    #[test]
    fn uniform_quantile() {
        let m = one(0.5, QualityLaw::Independent(vec![Marginal::Uniform { low: 0.0, high: 1.0 }]));
        let s = solve_dual(&m, &RevenueCurve::null(), &SolveOptions::default()).unwrap();
        assert!(s.converged);
        assert!((s.v[0] - 0.5).abs() < 1e-8, "{:?}", s.v);
    }

    #[test]
    fn full_capacity_is_stationary_below_support() {
        let m = one(1.0, QualityLaw::Independent(vec![Marginal::Uniform { low: 0.0, high: 1.0 }]));
        let s = solve_dual(&m, &RevenueCurve::null(), &SolveOptions::default()).unwrap();
        assert!(s.converged);
        assert!(s.v[0] <= 1e-9);
    }

    #[test]
    fn discrete_tie_is_found_exactly() {
        let atoms = Atoms::new(vec![0.25; 4], vec![vec![0.1], vec![0.4], vec![0.7], vec![0.9]]).unwrap();
        let m = one(0.25, QualityLaw::Atoms(atoms));
        let s = solve_dual(&m, &RevenueCurve::null(), &SolveOptions::default()).unwrap();
        assert!(s.converged);
        assert!(s.v[0] >= 0.7 - 1e-9 && s.v[0] <= 0.9 + 1e-9, "{:?}", s.v);
    }
}
