use rand::Rng;
use rayon::prelude::*;

use super::events::{argmax_set, Active, EventMass, EventTable};
use super::model::QualityVector;
use crate::error::{Error, Result};
use crate::exchange::Response;

const CHUNK: usize = 4096;

/// Finitely many quality vectors with probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Atoms {
    probs: Vec<f64>,
    values: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
}

impl Atoms {
    pub fn new(probs: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Atoms> {
        if probs.is_empty() || probs.len() != values.len() {
            return Err(Error::InvalidModel("atoms need matching non-empty probabilities and values".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|q| q.len() != dim || q.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidModel("atoms must be finite vectors of equal length".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel("atom probabilities must be non-negative and sum to one".into()));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Atoms { probs, values, cumulative })
    }

    /// Empirical law putting mass `1/M` on each sample.
    pub fn equally_weighted(values: Vec<Vec<f64>>) -> Result<Atoms> {
        if values.is_empty() {
            return Err(Error::Estimation("no samples".into()));
        }
        let w = 1.0 / values.len() as f64;
        Self::new(vec![w; values.len()], values)
    }

    pub fn dimension(&self) -> usize {
        self.values[0].len()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.probs.iter().copied().zip(self.values.iter().map(|v| v.as_slice()))
    }

    pub fn scaled(&self, gamma: f64) -> Atoms {
        Atoms {
            probs: self.probs.clone(),
            values: self.values.iter().map(|q| q.iter().map(|x| gamma * x).collect()).collect(),
            cumulative: self.cumulative.clone(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> QualityVector {
        let u: f64 = rng.gen::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self.cumulative.partition_point(|c| *c <= u).min(self.len() - 1);
        QualityVector { values: self.values[k].clone(), type_id: k }
    }

    /// Exact event table by enumeration; chunks are merged in a fixed order.
    pub fn events(&self, v: &[f64], active: &Active, response: &dyn Response) -> EventTable {
        let chunks: Vec<EventTable> = self
            .probs
            .par_chunks(CHUNK)
            .zip(self.values.par_chunks(CHUNK))
            .map(|(ps, qs)| {
                let mut table = EventTable::new();
                let mut adjusted = vec![0.0; v.len()];
                for (p, q) in ps.iter().zip(qs) {
                    if *p == 0.0 {
                        continue;
                    }
                    for a in active.indices() {
                        adjusted[a] = q[a] - v[a];
                    }
                    let (lambda, winners) = argmax_set(&adjusted, active);
                    if winners == 0 {
                        continue;
                    }
                    table.add(winners, EventMass::from_response(&response.respond(lambda), *p));
                }
                table
            })
            .collect();
        let mut table = EventTable::new();
        for c in &chunks {
            table.merge(c, 1.0);
        }
        table
    }
}
