use super::eval::DualProblem;
use super::solve::{solve_problem, DualSolution, SolveOptions};
use crate::error::{Error, Result};
use crate::exchange::RevenueCurve;
use crate::market::{Active, Atoms, QualityLaw, QualityVector};

/// Minimizes the sample-average dual
/// `(1/M) sum_m R(max_a(q_ma - v_a)) + sum_a v_a rho_a`.
///
/// The objective is piecewise linear for the null exchange and is solved
/// exactly by subset-direction descent. With one advertiser and no
/// exchange the minimizers form an interval between two order statistics;
/// its left end is returned.
pub fn solve_dual_saa(samples: &[QualityVector], rho: &[f64], curve: &RevenueCurve, opts: &SolveOptions) -> Result<DualSolution> {
    if samples.is_empty() {
        return Err(Error::Estimation("no samples".into()));
    }
    if samples.iter().any(|q| q.values.len() != rho.len()) {
        return Err(Error::Config("sample dimension does not match the advertiser count".into()));
    }
    let atoms = Atoms::equally_weighted(samples.iter().map(|q| q.values.clone()).collect())?;
    let problem = DualProblem {
        law: QualityLaw::Atoms(atoms),
        rho: rho.to_vec(),
        active: Active::all(rho.len()),
        response: curve,
        options: opts.events,
    };
    if rho.len() == 1 && curve.is_null() {
        let mut q: Vec<f64> = samples.iter().map(|s| s.values[0]).collect();
        q.sort_by(f64::total_cmp);
        let v = vec![q[lower_quantile_index(q.len(), rho[0])]];
        let evaluation = problem.evaluate(&v)?;
        let converged = evaluation.is_stationary(opts.tolerance);
        return Ok(DualSolution { v, evaluation, converged, iterations: 0 });
    }
    solve_problem(&problem, opts)
}

/// Zero-based index of the sample `(1 - rho)`-quantile: the
/// `max(1, ceil((1 - rho) M))`-th smallest value.
pub fn lower_quantile_index(m: usize, rho: f64) -> usize {
    let k = ((1.0 - rho) * m as f64 - 1e-9).ceil().max(1.0) as usize;
    k.min(m) - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(values: &[f64]) -> Vec<QualityVector> {
        values.iter().map(|&x| QualityVector { values: vec![x], type_id: 0 }).collect()
    }

    #[test]
    fn sample_quantile_left_endpoint() {
        let s = solve_dual_saa(&scalar(&[0.9, 0.1, 0.7, 0.4]), &[0.25], &RevenueCurve::null(), &SolveOptions::default()).unwrap();
        assert_eq!(s.v, vec![0.7]);
        assert!(s.converged);
    }

    #[test]
    fn single_sample_full_capacity() {
        let s = solve_dual_saa(&scalar(&[0.3]), &[1.0], &RevenueCurve::null(), &SolveOptions::default()).unwrap();
        assert_eq!(s.v, vec![0.3]);
    }

    #[test]
    fn general_path_reaches_the_quantile_interval() {
        // two advertisers, second one never competes
        let samples: Vec<QualityVector> =
            [0.1, 0.4, 0.7, 0.9].iter().map(|&x| QualityVector { values: vec![x, -5.0], type_id: 0 }).collect();
        let s = solve_dual_saa(&samples, &[0.25, 0.0], &RevenueCurve::null(), &SolveOptions::default()).unwrap();
        assert!(s.converged);
        assert!(s.v[0] >= 0.7 - 1e-8 && s.v[0] <= 0.9 + 1e-8, "{:?}", s.v);
    }
}
