//! Mixture of user types with multivariate log-normal qualities.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::events::{argmax_set, Active, EventMass, EventTable, Winners, OUTSIDE, TIE_TOLERANCE};
use super::model::{Advertiser, EventOptions, QualityVector, UserType};
use crate::error::{Error, Result};
use crate::exchange::Response;
use crate::numeric::linalg::factor_covariance;
use crate::numeric::{integrate, normal};

const TAIL: f64 = 12.0;

/// Variances below this are point masses for event computations.
const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureType {
    /// Advertiser indices, increasing.
    pub members: Vec<usize>,
    pub probability: f64,
    pub log_mean: Vec<f64>,
    /// Row-major covariance of the log-qualities.
    pub log_cov: Vec<f64>,
    factor: Vec<f64>,
}

impl MixtureType {
    pub fn new(members: Vec<usize>, probability: f64, log_mean: Vec<f64>, log_cov: Vec<f64>) -> Result<MixtureType> {
        let k = members.len();
        if k == 0 {
            return Err(Error::InvalidModel("user type without members".into()));
        }
        if log_mean.len() != k || log_cov.len() != k * k {
            return Err(Error::InvalidModel(format!("user type with {k} members needs a {k}-vector mean and {k}x{k} covariance")));
        }
        if log_mean.iter().chain(&log_cov).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("user type parameters must be finite".into()));
        }
        if !(probability >= 0.0) {
            return Err(Error::InvalidModel(format!("type probability {probability} is negative")));
        }
        for i in 0..k {
            for j in 0..i {
                let (x, y) = (log_cov[i * k + j], log_cov[j * k + i]);
                if (x - y).abs() > 1e-9 * (1.0 + x.abs().max(y.abs())) {
                    return Err(Error::InvalidModel("type covariance is not symmetric".into()));
                }
            }
        }
        let (log_cov, factor, repaired) = factor_covariance(&log_cov, k)?;
        if repaired {
            log::warn!("type covariance over members {members:?} was not positive semi-definite; eigenvalues clipped");
        }
        Ok(MixtureType { members, probability, log_mean, log_cov, factor })
    }

    fn position(&self, a: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == a)
    }

    fn draw_logs<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let k = self.members.len();
        let z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        for i in 0..k {
            out[i] = self.log_mean[i] + (0..=i).map(|j| self.factor[i * k + j] * z[j]).sum::<f64>();
        }
    }
}

/// Qualities `exp(N(mu_T, Sigma_T))` for members of the drawn type and
/// `-penalty` for everyone else.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    types: Vec<MixtureType>,
    penalties: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Mixture {
    pub fn new(types: Vec<MixtureType>, penalties: Vec<f64>) -> Result<Mixture> {
        if types.is_empty() {
            return Err(Error::InvalidModel("mixture needs at least one type".into()));
        }
        let total: f64 = types.iter().map(|t| t.probability).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidModel(format!("type probabilities sum to {total}, not 1")));
        }
        let mut seen: Vec<&[usize]> = Vec::new();
        for t in &types {
            if t.members.iter().any(|&a| a >= penalties.len()) || t.members.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidModel("type members must be distinct known advertisers".into()));
            }
            if seen.contains(&t.members.as_slice()) {
                return Err(Error::Config(format!("two types share the member set {:?}", t.members)));
            }
            seen.push(&t.members);
        }
        let mut acc = 0.0;
        let cumulative = types
            .iter()
            .map(|t| {
                acc += t.probability;
                acc
            })
            .collect();
        Ok(Mixture { types, penalties, cumulative })
    }

    /// Builds the mixture from configured types, mapping ids to indices.
    pub fn from_types(advertisers: &[Advertiser], types: &[UserType]) -> Result<Mixture> {
        let index: HashMap<u32, usize> = advertisers.iter().enumerate().map(|(i, a)| (a.id, i)).collect();
        let mut built = Vec::with_capacity(types.len());
        for t in types {
            let k = t.members.len();
            if t.log_cov.len() != k || t.log_cov.iter().any(|row| row.len() != k) {
                return Err(Error::InvalidModel(format!("type {:?} needs a {k}x{k} covariance", t.members)));
            }
            let mut order: Vec<(usize, usize)> = Vec::with_capacity(k);
            for (pos, id) in t.members.iter().enumerate() {
                let a = *index
                    .get(id)
                    .ok_or_else(|| Error::InvalidModel(format!("type member {id} is not an advertiser")))?;
                order.push((a, pos));
            }
            order.sort_unstable();
            if order.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidModel(format!("type {:?} lists a member twice", t.members)));
            }
            let members = order.iter().map(|o| o.0).collect();
            let mean = order.iter().map(|o| t.log_mean.get(o.1).copied().unwrap_or(f64::NAN)).collect();
            let cov = order.iter().flat_map(|oi| order.iter().map(move |oj| t.log_cov[oi.1][oj.1])).collect();
            built.push(MixtureType::new(members, t.probability, mean, cov)?);
        }
        Self::new(built, advertisers.iter().map(|a| a.penalty).collect())
    }

    /// Configuration form with advertiser ids.
    pub fn to_types(&self, ids: &[u32]) -> Vec<UserType> {
        self.types
            .iter()
            .map(|t| {
                let k = t.members.len();
                UserType {
                    members: t.members.iter().map(|&a| ids[a]).collect(),
                    probability: t.probability,
                    log_mean: t.log_mean.clone(),
                    log_cov: (0..k).map(|i| t.log_cov[i * k..(i + 1) * k].to_vec()).collect(),
                }
            })
            .collect()
    }

    pub fn dimension(&self) -> usize {
        self.penalties.len()
    }

    pub fn types(&self) -> &[MixtureType] {
        &self.types
    }

    pub fn penalties(&self) -> &[f64] {
        &self.penalties
    }

    pub fn scaled(&self, gamma: f64) -> Mixture {
        let shift = gamma.ln();
        Mixture {
            types: self
                .types
                .iter()
                .map(|t| MixtureType { log_mean: t.log_mean.iter().map(|m| m + shift).collect(), ..t.clone() })
                .collect(),
            penalties: self.penalties.iter().map(|p| gamma * p).collect(),
            cumulative: self.cumulative.clone(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> QualityVector {
        let u: f64 = rng.gen::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|c| *c <= u).min(self.types.len() - 1);
        let mut values: Vec<f64> = self.penalties.iter().map(|p| -p).collect();
        self.fill_type(k, rng, &mut values);
        QualityVector { values, type_id: k }
    }

    fn fill_type<R: Rng + ?Sized>(&self, k: usize, rng: &mut R, values: &mut [f64]) {
        let t = &self.types[k];
        let mut logs = vec![0.0; t.members.len()];
        t.draw_logs(rng, &mut logs);
        for (i, &a) in t.members.iter().enumerate() {
            values[a] = logs[i].exp();
        }
    }

    /// Event table by one-dimensional quadrature per (type, in-type winner);
    /// ties arise only among out-of-type constants and the outside option.
    pub fn events(&self, v: &[f64], active: &Active, response: &dyn Response, opts: &EventOptions) -> Result<EventTable> {
        let kinks = response.kinks();
        let mut table = EventTable::new();
        for (ti, t) in self.types.iter().enumerate() {
            if t.probability == 0.0 {
                continue;
            }
            let sub = self.type_events(ti, t, v, active, response, &kinks, opts)?;
            table.merge(&sub, t.probability);
        }
        Ok(table)
    }

    #[allow(clippy::too_many_arguments)]
    fn type_events(
        &self,
        ti: usize,
        t: &MixtureType,
        v: &[f64],
        active: &Active,
        response: &dyn Response,
        kinks: &[f64],
        opts: &EventOptions,
    ) -> Result<EventTable> {
        let k = t.members.len();
        let mut table = EventTable::new();

        // best constant among out-of-type advertisers and the outside option
        let mut floor = if active.outside { 0.0 } else { f64::NEG_INFINITY };
        for b in active.indices() {
            if t.position(b).is_none() {
                floor = floor.max(-self.penalties[b] - v[b]);
            }
        }
        let mut floor_set: Winners = 0;
        if floor.is_finite() {
            if active.outside && floor <= TIE_TOLERANCE {
                floor_set |= OUTSIDE;
            }
            for b in active.indices() {
                if t.position(b).is_none() && -self.penalties[b] - v[b] >= floor - TIE_TOLERANCE {
                    floor_set |= 1u64 << b;
                }
            }
        }

        let inside: Vec<usize> = (0..k).filter(|&i| active.contains(t.members[i])).collect();
        if inside.is_empty() {
            if floor_set != 0 {
                table.add(floor_set, EventMass::from_response(&response.respond(floor), 1.0));
            }
            return Ok(table);
        }
        let mean: Vec<f64> = inside.iter().map(|&i| t.log_mean[i]).collect();
        let cov: Vec<f64> = inside.iter().flat_map(|&i| inside.iter().map(move |&j| t.log_cov[i * k + j])).collect();
        let n = inside.len();
        let adv: Vec<usize> = inside.iter().map(|&i| t.members[i]).collect();

        if cov.iter().all(|c| *c == 0.0) {
            // point mass
            let mut adjusted = vec![0.0; v.len()];
            for b in active.indices() {
                adjusted[b] = match t.position(b) {
                    Some(i) => t.log_mean[i].exp() - v[b],
                    None => -self.penalties[b] - v[b],
                };
            }
            let (lambda, winners) = argmax_set(&adjusted, active);
            table.add(winners, EventMass::from_response(&response.respond(lambda), 1.0));
            return Ok(table);
        }
        if self.is_degenerate(&cov, n) {
            log::warn!("user type {ti} is degenerate; estimating its events by simulation");
            return Ok(self.simulated_type_events(ti, v, active, response, opts));
        }

        if floor.is_finite() {
            let upper: Vec<f64> = adv.iter().map(|&b| log_or_neg_inf(floor + v[b])).collect();
            let g = normal::mvn_cdf(&mean, &cov, &upper);
            if g > 0.0 {
                table.add(floor_set, EventMass::from_response(&response.respond(floor), g));
            }
        }

        for (ai, &a) in adv.iter().enumerate() {
            let var_a = cov[ai * n + ai];
            let sd_a = var_a.sqrt();
            let others: Vec<usize> = (0..n).filter(|&j| j != ai).collect();
            let slope: Vec<f64> = others.iter().map(|&j| cov[j * n + ai] / var_a).collect();
            let cond_cov: Vec<f64> = others
                .iter()
                .flat_map(|&i| others.iter().map(move |&j| (i, j)))
                .map(|(i, j)| cov[i * n + j] - cov[i * n + ai] * cov[ai * n + j] / var_a)
                .collect();

            let mut lo = mean[ai] - TAIL * sd_a;
            let hi = mean[ai] + TAIL * sd_a;
            if floor.is_finite() && floor + v[a] > 0.0 {
                lo = lo.max((floor + v[a]).ln());
            }
            for &j in &others {
                let b = adv[j];
                if v[a] > v[b] {
                    lo = lo.max((v[a] - v[b]).ln());
                }
            }
            if !(hi > lo) {
                continue;
            }
            let breaks: Vec<f64> = kinks.iter().filter(|&&kk| kk + v[a] > 0.0).map(|kk| (kk + v[a]).ln()).collect();
            let mut cond_mean = vec![0.0; others.len()];
            let mut upper = vec![0.0; others.len()];
            let integrand = |y: f64| {
                let q = y.exp();
                for (o, &j) in others.iter().enumerate() {
                    cond_mean[o] = mean[j] + slope[o] * (y - mean[ai]);
                    upper[o] = log_or_neg_inf(q - v[a] + v[adv[j]]);
                }
                let w = normal::mvn_cdf(&cond_mean, &cond_cov, &upper) * normal::pdf((y - mean[ai]) / sd_a) / sd_a;
                if w == 0.0 {
                    return [0.0; 4];
                }
                let r = response.respond(q - v[a]);
                [w * r.value, w * (1.0 - r.survival), w * (1.0 - r.survival_max), w * r.revenue]
            };
            let m = integrate(integrand, lo, hi, &breaks, opts.tolerance)?;
            table.add(1u64 << a, EventMass::from_array(m));
        }
        Ok(table)
    }

    fn is_degenerate(&self, cov: &[f64], n: usize) -> bool {
        for a in 0..n {
            let var_a = cov[a * n + a];
            if var_a <= DEGENERATE {
                return true;
            }
            for b in 0..n {
                if b != a {
                    let cond = cov[b * n + b] - cov[b * n + a] * cov[a * n + b] / var_a;
                    if cond <= 1e-9 * cov[b * n + b] {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn simulated_type_events(&self, ti: usize, v: &[f64], active: &Active, response: &dyn Response, opts: &EventOptions) -> EventTable {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(ti as u64);
        let draws = opts.mc_samples.max(1);
        let w = 1.0 / draws as f64;
        let mut values: Vec<f64> = self.penalties.iter().map(|p| -p).collect();
        let mut adjusted = vec![0.0; v.len()];
        let mut table = EventTable::new();
        for _ in 0..draws {
            self.fill_type(ti, &mut rng, &mut values);
            for b in active.indices() {
                adjusted[b] = values[b] - v[b];
            }
            let (lambda, winners) = argmax_set(&adjusted, active);
            if winners != 0 {
                table.add(winners, EventMass::from_response(&response.respond(lambda), w));
            }
        }
        table
    }
}

fn log_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}
