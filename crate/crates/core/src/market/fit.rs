use std::collections::BTreeMap;

use super::mixture::{Mixture, MixtureType};
use crate::error::{Error, Result};

/// Maximum-likelihood fit of the log-normal type mixture. Each sample lists
/// one entry per advertiser; positive entries are the qualities of the
/// advertisers in the sample's type, anything else marks non-membership.
pub fn fit_mixture(samples: &[Vec<Option<f64>>], penalties: &[f64]) -> Result<Mixture> {
    if samples.is_empty() {
        return Err(Error::Estimation("no quality samples".into()));
    }
    let a = penalties.len();
    let mut groups: BTreeMap<Vec<usize>, Vec<Vec<f64>>> = BTreeMap::new();
    for (m, s) in samples.iter().enumerate() {
        if s.len() != a {
            return Err(Error::Estimation(format!("sample {m} has {} entries for {a} advertisers", s.len())));
        }
        let members: Vec<usize> = (0..a).filter(|&i| matches!(s[i], Some(q) if q > 0.0)).collect();
        if members.is_empty() {
            return Err(Error::Estimation(format!("sample {m} has no positive quality")));
        }
        let logs = members.iter().map(|&i| s[i].unwrap().ln()).collect();
        groups.entry(members).or_default().push(logs);
    }
    let total = samples.len() as f64;
    let mut types = Vec::with_capacity(groups.len());
    for (members, logs) in groups {
        let k = members.len();
        let n = logs.len() as f64;
        if logs.len() == 1 {
            log::warn!("type {members:?} has a single sample; its covariance is zero");
        }
        let mean: Vec<f64> = (0..k).map(|i| logs.iter().map(|x| x[i]).sum::<f64>() / n).collect();
        let mut cov = vec![0.0; k * k];
        for x in &logs {
            for i in 0..k {
                for j in 0..k {
                    cov[i * k + j] += (x[i] - mean[i]) * (x[j] - mean[j]);
                }
            }
        }
        cov.iter_mut().for_each(|c| *c /= n);
        types.push(MixtureType::new(members, n / total, mean, cov)?);
    }
    Mixture::new(types, penalties.to_vec())
}

/// Turns sampled quality vectors into fitting input: positive entries are
/// in-type qualities.
pub fn membership_samples(values: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    values.iter().map(|q| q.iter().map(|&x| (x > 0.0).then_some(x)).collect()).collect()
}
