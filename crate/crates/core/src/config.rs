//! JSON and CSV formats for models, policies, solutions and logs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dual::DualSolution;
use crate::error::{Error, Result};
use crate::exchange::{BidModel, BidSample, RemnantOnly, Response, RevenueCurve, SharedExchange, DEFAULT_GRID_POINTS};
use crate::market::events::OUTSIDE;
use crate::market::{Advertiser, Atoms, Marginal, MarketModel, Mixture, QualityLaw, QualityVector, UserType, Winners};
use crate::policy::PolicyConfig;
use crate::tiebreak::TieBreakRule;

/// Quality laws other than the log-normal type mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityLawConfig {
    Independent { marginals: Vec<Marginal> },
    Atoms { probs: Vec<f64>, values: Vec<Vec<f64>> },
}

/// The model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub advertisers: Vec<Advertiser>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub types: Vec<UserType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_law: Option<QualityLawConfig>,
    #[serde(default = "unit_gamma")]
    pub gamma: f64,
    #[serde(default = "null_exchange")]
    pub exchange: BidModel,
    /// Fraction of each exchange payment kept by the exchange.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revenue_share: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

fn unit_gamma() -> f64 {
    1.0
}

fn null_exchange() -> BidModel {
    BidModel::Null
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<ModelConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("model file: {e}")))
    }

    pub fn load(path: &Path) -> Result<ModelConfig> {
        Self::from_json(&read_text(path)?)
    }

    pub fn quality_law(&self) -> Result<QualityLaw> {
        match (&self.quality_law, self.types.is_empty()) {
            (Some(_), false) => Err(Error::Config("give either types or quality_law, not both".into())),
            (None, true) => Err(Error::Config("the model needs types or a quality_law".into())),
            (None, false) => Ok(QualityLaw::Mixture(Mixture::from_types(&self.advertisers, &self.types)?)),
            (Some(QualityLawConfig::Independent { marginals }), true) => {
                for m in marginals {
                    m.validate()?;
                }
                Ok(QualityLaw::Independent(marginals.clone()))
            }
            (Some(QualityLawConfig::Atoms { probs, values }), true) => Ok(QualityLaw::Atoms(Atoms::new(probs.clone(), values.clone())?)),
        }
    }

    pub fn market(&self) -> Result<MarketModel> {
        MarketModel::new(self.advertisers.clone(), self.quality_law()?, self.gamma)
    }

    pub fn curve(&self) -> Result<RevenueCurve> {
        RevenueCurve::build(&self.exchange, self.grid_points.unwrap_or(DEFAULT_GRID_POINTS))
    }

    /// Serializable form of a model.
    pub fn from_market(model: &MarketModel, exchange: BidModel) -> ModelConfig {
        let (types, quality_law) = match &model.law {
            QualityLaw::Mixture(m) => (m.to_types(&model.ids()), None),
            QualityLaw::Independent(ms) => (Vec::new(), Some(QualityLawConfig::Independent { marginals: ms.clone() })),
            QualityLaw::Atoms(a) => {
                let (probs, values) = a.iter().map(|(p, q)| (p, q.to_vec())).unzip();
                (Vec::new(), Some(QualityLawConfig::Atoms { probs, values }))
            }
        };
        ModelConfig {
            advertisers: model.advertisers.clone(),
            types,
            quality_law,
            gamma: model.gamma,
            exchange,
            revenue_share: None,
            grid_points: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Exchange response with the configured revenue share applied.
pub struct Exchange {
    pub curve: RevenueCurve,
    pub revenue_share: f64,
}

impl Exchange {
    pub fn new(curve: RevenueCurve, revenue_share: Option<f64>) -> Result<Exchange> {
        let share = revenue_share.unwrap_or(0.0);
        SharedExchange::new(&curve, share)?;
        Ok(Exchange { curve, revenue_share: share })
    }
}

impl Response for Exchange {
    fn respond(&self, c: f64) -> crate::exchange::ExchangeResponse {
        if self.revenue_share == 0.0 {
            return self.curve.respond(c);
        }
        SharedExchange::new(&self.curve, self.revenue_share).expect("validated share").respond(c)
    }

    fn respond_greatest(&self, c: f64) -> crate::exchange::ExchangeResponse {
        if self.revenue_share == 0.0 {
            return self.curve.respond_greatest(c);
        }
        SharedExchange::new(&self.curve, self.revenue_share).expect("validated share").respond_greatest(c)
    }

    fn kinks(&self) -> Vec<f64> {
        if self.revenue_share == 0.0 {
            return self.curve.kinks();
        }
        SharedExchange::new(&self.curve, self.revenue_share).expect("validated share").kinks()
    }

    fn sell(&self, response: &crate::exchange::ExchangeResponse, rng: &mut dyn rand::RngCore) -> Option<f64> {
        if self.revenue_share == 0.0 {
            return self.curve.sell(response, rng);
        }
        SharedExchange::new(&self.curve, self.revenue_share).expect("validated share").sell(response, rng)
    }
}

/// How the policy uses the exchange.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// Every impression is offered at the reserve matching its opportunity cost.
    #[default]
    Joint,
    /// Only impressions no contract wants are offered, at the zero-cost reserve.
    Remnant,
}

impl PolicyMode {
    /// Runs `f` with the response this mode uses.
    pub fn with_response<T>(self, exchange: &dyn Response, f: impl FnOnce(&dyn Response) -> T) -> T {
        match self {
            PolicyMode::Joint => f(exchange),
            PolicyMode::Remnant => f(&RemnantOnly::new(exchange)),
        }
    }
}

/// The policy file: `{v: {id: price}, tie_rule: {"[1,2]": {"1": p}}, mode}`.
/// Id `0` is the outside option.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub v: BTreeMap<String, f64>,
    #[serde(default)]
    pub tie_rule: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub mode: PolicyMode,
    /// Share of the flexible exchange mass sold at a kink, per tie set.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sell_share: BTreeMap<String, f64>,
}

fn parse_id(s: &str) -> Result<u32> {
    s.trim().parse().map_err(|_| Error::Config(format!("'{s}' is not an advertiser id")))
}

fn bit_of(model: &MarketModel, id: u32) -> Result<u64> {
    if id == 0 {
        return Ok(OUTSIDE);
    }
    model.index_of(id).map(|a| 1u64 << a).ok_or_else(|| Error::Config(format!("unknown advertiser id {id}")))
}

fn id_of(model: &MarketModel, bit: u64) -> u32 {
    if bit == OUTSIDE {
        0
    } else {
        model.advertisers[bit.trailing_zeros() as usize].id
    }
}

fn set_label(model: &MarketModel, set: Winners) -> String {
    let mut ids: Vec<u32> = (0..64).map(|k| 1u64 << k).filter(|b| set & b != 0).map(|b| id_of(model, b)).collect();
    ids.sort_unstable();
    format!("[{}]", ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
}

fn parse_set(model: &MarketModel, label: &str) -> Result<Winners> {
    let inner = label.trim().trim_start_matches('[').trim_end_matches(']');
    let mut set = 0u64;
    for part in inner.split(',').filter(|s| !s.trim().is_empty()) {
        set |= bit_of(model, parse_id(part)?)?;
    }
    Ok(set)
}

/// Dual vector keyed by advertiser id.
pub fn v_by_id(model: &MarketModel, v: &[f64]) -> BTreeMap<String, f64> {
    model.ids().iter().zip(v).map(|(id, x)| (id.to_string(), *x)).collect()
}

/// Dual vector in advertiser order from an id map.
pub fn v_from_ids(model: &MarketModel, v: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; model.len()];
    for (k, x) in v {
        let id = parse_id(k)?;
        let a = model.index_of(id).ok_or_else(|| Error::Config(format!("unknown advertiser id {id}")))?;
        if !x.is_finite() {
            return Err(Error::Config(format!("bid price of advertiser {id} is not finite")));
        }
        out[a] = *x;
    }
    if let Some(a) = out.iter().position(|x| x.is_nan()) {
        return Err(Error::Config(format!("no bid price for advertiser {}", model.advertisers[a].id)));
    }
    Ok(out)
}

impl PolicyFile {
    pub fn from_policy(model: &MarketModel, config: &PolicyConfig, mode: PolicyMode) -> PolicyFile {
        let tie_rule = config
            .tiebreak
            .routing
            .iter()
            .filter(|(set, _)| set.count_ones() > 1)
            .map(|(set, route)| {
                (set_label(model, *set), route.iter().map(|(b, p)| (id_of(model, *b).to_string(), *p)).collect())
            })
            .collect();
        let sell_share = config.tiebreak.sell_share.iter().map(|(set, t)| (set_label(model, *set), *t)).collect();
        PolicyFile { v: v_by_id(model, &config.v), tie_rule, mode, sell_share }
    }

    pub fn to_policy(&self, model: &MarketModel) -> Result<PolicyConfig> {
        let v = v_from_ids(model, &self.v)?;
        let mut routing = BTreeMap::new();
        for (label, route) in &self.tie_rule {
            let set = parse_set(model, label)?;
            let mut r = Vec::new();
            for (id, p) in route {
                let bit = bit_of(model, parse_id(id)?)?;
                if set & bit == 0 {
                    return Err(Error::Config(format!("tie rule for {label} routes to {id}, which is not in the set")));
                }
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::Config(format!("routing probability {p} for {label} is outside [0, 1]")));
                }
                r.push((bit, *p));
            }
            routing.insert(set, r);
        }
        let mut tiebreak = TieBreakRule::from_routing(routing);
        for (label, t) in &self.sell_share {
            if !(0.0..=1.0).contains(t) {
                return Err(Error::Config(format!("sell share {t} for {label} is outside [0, 1]")));
            }
            tiebreak.sell_share.insert(parse_set(model, label)?, *t);
        }
        Ok(PolicyConfig { v, tiebreak })
    }

    pub fn load(path: &Path) -> Result<PolicyFile> {
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::Config(format!("policy file: {e}")))
    }
}

/// The solution file `{v: {id: value}, objective, converged, iterations}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub v: BTreeMap<String, f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SolutionFile {
    pub fn new(model: &MarketModel, solution: &DualSolution) -> SolutionFile {
        SolutionFile {
            v: v_by_id(model, &solution.v),
            objective: solution.evaluation.objective,
            converged: solution.converged,
            iterations: solution.iterations,
        }
    }

    pub fn load(path: &Path) -> Result<SolutionFile> {
        serde_json::from_str(&read_text(path)?).map_err(|e| Error::Config(format!("solution file: {e}")))
    }
}

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

/// Quality log: one column per advertiser id, an empty cell for an
/// advertiser outside the impression's type.
pub fn read_quality_samples<R: Read>(model_ids: &[u32], input: R) -> Result<Vec<Vec<Option<f64>>>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<u32> = r.headers()?.iter().map(parse_id).collect::<Result<_>>()?;
    let mut column = Vec::with_capacity(model_ids.len());
    for id in model_ids {
        column.push(header.iter().position(|h| h == id).ok_or_else(|| Error::Config(format!("no column for advertiser {id}")))?);
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(column.len());
        for &c in &column {
            let cell = rec.get(c).unwrap_or("").trim();
            if cell.is_empty() {
                row.push(None);
            } else {
                let x: f64 = cell.parse().map_err(|_| Error::Config(format!("row {}: '{cell}' is not a number", line + 1)))?;
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::Config(format!("row {}: qualities must be positive", line + 1)));
                }
                row.push(Some(x));
            }
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_quality_samples<W: Write>(model: &MarketModel, samples: &[QualityVector], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(model.ids().iter().map(|i| i.to_string()))?;
    for q in samples {
        w.write_record(q.values.iter().map(|x| if *x > 0.0 { x.to_string() } else { String::new() }))?;
    }
    w.flush()?;
    Ok(())
}

/// Quality vectors from a log; missing entries become `-penalty`.
pub fn complete_samples(samples: &[Vec<Option<f64>>], penalties: &[f64]) -> Vec<QualityVector> {
    samples
        .iter()
        .map(|row| QualityVector { values: row.iter().zip(penalties).map(|(x, t)| x.unwrap_or(-t)).collect(), type_id: 0 })
        .collect()
}

/// Bid log with header `b1,b2`.
pub fn read_bids<R: Read>(input: R) -> Result<Vec<BidSample>> {
    #[derive(Deserialize)]
    struct Row {
        b1: f64,
        b2: f64,
    }
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        out.push(BidSample::new(row.b1, row.b2)?);
    }
    if out.is_empty() {
        return Err(Error::Estimation("the bid log has no rows".into()));
    }
    Ok(out)
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
