use std::io::{Read, Write};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::bid::{empirical_revenue, BidLaw, BidModel};
use super::response::{ExchangeResponse, Price, Response};
use crate::error::{Error, Result};
use crate::numeric::normal;

pub const DEFAULT_GRID_POINTS: usize = 100;

/// Relative distance from a hull slope within which a cost is treated as
/// that kink.
pub const KINK_TOLERANCE: f64 = 1e-12;

/// One grid point of a revenue curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub s: f64,
    pub p: Price,
    pub r: f64,
}

/// Closed-form or root-finding refinement available for smooth single-bidder
/// laws.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Refinement {
    None,
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

/// Exchange revenue as a function of the acceptance probability, tabulated on
/// a grid and optimized over its upper concave envelope.
#[derive(Debug, Clone)]
pub struct RevenueCurve {
    model: Option<BidModel>,
    points: Vec<CurvePoint>,
    hull: Vec<usize>,
    slopes: Vec<f64>,
    refinement: Refinement,
}

/// Outcome of [`RevenueCurve::check_regularity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport {
    /// Largest amount by which a grid value falls below the chord of its
    /// neighbours.
    pub max_concavity_violation: f64,
    pub min_revenue: f64,
    /// `|r(0)|`.
    pub origin_gap: f64,
    pub regular: bool,
}

fn uniform_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| if j + 1 == n { 1.0 } else { j as f64 / (n - 1) as f64 })
}

impl RevenueCurve {
    pub fn build(model: &BidModel, grid_points: usize) -> Result<RevenueCurve> {
        if grid_points < 2 {
            return Err(Error::Config(format!("revenue curve needs at least 2 grid points, got {grid_points}")));
        }
        model.validate()?;
        let zero = CurvePoint { s: 0.0, p: Price::RejectAll, r: 0.0 };
        let mut refinement = Refinement::None;
        let points: Vec<CurvePoint> = match model {
            BidModel::Null => uniform_grid(grid_points)
                .map(|s| if s == 0.0 { zero } else { CurvePoint { s, p: Price::Finite(0.0), r: 0.0 } })
                .collect(),
            BidModel::SingleBidder { law: BidLaw::Discrete { values, probs } } => {
                let mut pts = vec![zero];
                let mut tail = 0.0;
                for (v, q) in values.iter().zip(probs).rev() {
                    tail += q;
                    pts.push(CurvePoint { s: tail.min(1.0), p: Price::Finite(*v), r: tail.min(1.0) * v });
                }
                pts.last_mut().unwrap().s = 1.0;
                pts.last_mut().unwrap().r = values[0];
                pts
            }
            BidModel::SingleBidder { law } => {
                refinement = match *law {
                    BidLaw::Uniform { low, high } => Refinement::Uniform { low, high },
                    BidLaw::Exponential { rate } => Refinement::Exponential { rate },
                    BidLaw::LogNormal { mu, sigma } => Refinement::LogNormal { mu, sigma },
                    BidLaw::Discrete { .. } => Refinement::None,
                };
                uniform_grid(grid_points)
                    .map(|s| {
                        if s == 0.0 {
                            zero
                        } else {
                            let p = law.price_for_survival(s);
                            CurvePoint { s, p: Price::Finite(p), r: s * p }
                        }
                    })
                    .collect()
            }
            BidModel::SecondPrice { law, bidders } => {
                let mut pts = Vec::with_capacity(grid_points);
                for s in uniform_grid(grid_points) {
                    if s == 0.0 {
                        pts.push(zero);
                        continue;
                    }
                    let p = law.inverse_cdf((1.0 - s).powf(1.0 / *bidders as f64));
                    let r = BidModel::second_price_revenue(law, *bidders, p)?;
                    pts.push(CurvePoint { s, p: Price::Finite(p), r });
                }
                pts
            }
            BidModel::Empirical { samples } => {
                let mut highest: Vec<f64> = samples.iter().map(|b| b.highest).collect();
                highest.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let m = highest.len();
                uniform_grid(grid_points)
                    .map(|s| {
                        if s == 0.0 {
                            return zero;
                        }
                        // lower (1 - s) quantile of the highest bid
                        let k = (((1.0 - s) * m as f64).ceil() as usize).clamp(1, m);
                        let p = highest[k - 1];
                        CurvePoint { s, p: Price::Finite(p), r: empirical_revenue(samples, p) }
                    })
                    .collect()
            }
        };
        let mut curve = Self::assemble(Some(model.clone()), points)?;
        if let Refinement::LogNormal { .. } = refinement {
            if !curve.check_regularity().regular {
                refinement = Refinement::None;
            }
        }
        curve.refinement = refinement;
        Ok(curve)
    }

    /// Curve from explicit grid points (no bid model behind it).
    pub fn from_points(points: Vec<CurvePoint>) -> Result<RevenueCurve> {
        Self::assemble(None, points)
    }

    fn assemble(model: Option<BidModel>, points: Vec<CurvePoint>) -> Result<RevenueCurve> {
        validate_points(&points)?;
        let hull = upper_hull(&points);
        let slopes = hull
            .windows(2)
            .map(|w| {
                let (a, b) = (&points[w[0]], &points[w[1]]);
                (b.r - a.r) / (b.s - a.s)
            })
            .collect();
        Ok(RevenueCurve { model, points, hull, slopes, refinement: Refinement::None })
    }

    pub fn null() -> RevenueCurve {
        Self::build(&BidModel::Null, 2).expect("null curve is valid")
    }

    pub fn model(&self) -> Option<&BidModel> {
        self.model.as_ref()
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// Grid points on the upper concave envelope.
    pub fn hull_points(&self) -> Vec<CurvePoint> {
        self.hull.iter().map(|&i| self.points[i]).collect()
    }

    /// The reject-all reserve and, for bounded bid supports, the numeric
    /// price that no bid clears.
    pub fn null_price(&self) -> (Price, Option<f64>) {
        let numeric = match &self.model {
            Some(BidModel::SingleBidder { law }) | Some(BidModel::SecondPrice { law, .. }) => law.null_price(),
            Some(BidModel::Empirical { samples }) => samples.iter().map(|b| b.highest).reduce(f64::max),
            _ => None,
        };
        (Price::RejectAll, numeric)
    }

    pub fn is_null(&self) -> bool {
        matches!(self.model, Some(BidModel::Null)) || self.points.iter().all(|p| p.r == 0.0)
    }

    /// Piecewise-linear interpolation of the tabulated revenue.
    pub fn revenue_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let j = self.points.partition_point(|p| p.s < s);
        if j == 0 {
            return self.points[0].r;
        }
        let (a, b) = (&self.points[j - 1], &self.points[j]);
        a.r + (b.r - a.r) * (s - a.s) / (b.s - a.s)
    }

    pub fn check_regularity(&self) -> RegularityReport {
        let pts = &self.points;
        let mut violation: f64 = 0.0;
        for w in pts.windows(3) {
            let (a, b, c) = (&w[0], &w[1], &w[2]);
            let chord = a.r + (c.r - a.r) * (b.s - a.s) / (c.s - a.s);
            violation = violation.max(chord - b.r);
        }
        let min_revenue = pts.iter().map(|p| p.r).fold(f64::INFINITY, f64::min);
        let max_revenue = pts.iter().map(|p| p.r.abs()).fold(0.0, f64::max);
        let origin_gap = pts[0].r.abs();
        let tol = 1e-9 * max_revenue.max(1.0);
        RegularityReport {
            max_concavity_violation: violation,
            min_revenue,
            origin_gap,
            regular: violation <= tol && min_revenue >= -tol && origin_gap <= tol,
        }
    }

    /// Hull vertices of the least and greatest maximizers. Costs within a
    /// relative `KINK_TOLERANCE` of a slope count as that kink, so that
    /// roundoff in the bid prices does not hide a tie with the exchange.
    fn hull_maximizers(&self, c: f64) -> (usize, usize) {
        let tol = KINK_TOLERANCE * c.abs().max(1.0);
        (self.slopes.partition_point(|d| *d > c + tol), self.slopes.partition_point(|d| *d >= c - tol))
    }

    fn respond_hull(&self, c: f64) -> ExchangeResponse {
        let (least, greatest) = self.hull_maximizers(c);
        let a = &self.points[self.hull[least]];
        let b = &self.points[self.hull[greatest]];
        ExchangeResponse { survival: a.s, survival_max: b.s, reserve_price: a.p, value: a.r + (1.0 - a.s) * c, revenue: a.r }
    }

    fn respond_lognormal(&self, mu: f64, sigma: f64, c: f64) -> ExchangeResponse {
        let price = |s: f64| (mu - sigma * normal::quantile(s)).exp();
        // marginal revenue r'(s) = q(s) (1 - sigma s / phi(z(s)))
        let marginal = |s: f64| {
            if s <= 0.0 {
                return f64::INFINITY;
            }
            if s >= 1.0 {
                return f64::NEG_INFINITY;
            }
            let z = normal::quantile(s);
            price(s) * (1.0 - sigma * s / normal::pdf(z))
        };
        let vertex = self.slopes.partition_point(|d| *d > c);
        let mut lo = if vertex == 0 { 0.0 } else { self.points[self.hull[vertex - 1]].s };
        let mut hi = if vertex + 1 < self.hull.len() { self.points[self.hull[vertex + 1]].s } else { 1.0 };
        if marginal(hi) >= c {
            lo = hi;
        } else if marginal(lo) <= c {
            hi = lo;
        }
        while hi > lo {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if marginal(mid) > c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = hi;
        if s <= 0.0 {
            return ExchangeResponse::bypass(c);
        }
        let p = price(s);
        let r = s * p;
        ExchangeResponse { survival: s, survival_max: s, reserve_price: Price::Finite(p), value: r + (1.0 - s) * c, revenue: r }
    }

    /// Writes the grid as CSV with columns `s,p,r`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["s", "p", "r"])?;
        for pt in &self.points {
            w.write_record([pt.s.to_string(), pt.p.to_string(), pt.r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a curve written by [`RevenueCurve::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<RevenueCurve> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Config("curve rows need three columns s,p,r".into()));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i].trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number '{}'", &rec[i])))
            };
            points.push(CurvePoint { s: num(0)?, p: Price::parse(&rec[1])?, r: num(2)? });
        }
        Self::from_points(points)
    }
}

fn validate_points(points: &[CurvePoint]) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidModel(format!("revenue curve: {m}")));
    if points.len() < 2 {
        return bad("needs at least two grid points");
    }
    if points[0].s != 0.0 || points[points.len() - 1].s != 1.0 {
        return bad("grid must cover s = 0 and s = 1");
    }
    if points.windows(2).any(|w| !(w[1].s > w[0].s)) {
        return bad("grid must be strictly increasing in s");
    }
    if points[0].r != 0.0 {
        return bad("r(0) must be 0");
    }
    if points.iter().any(|p| !(p.r.is_finite() && p.r >= 0.0)) {
        return bad("revenue must be finite and non-negative");
    }
    if points.windows(2).any(|w| w[1].p.as_f64() > w[0].p.as_f64()) {
        return bad("price must be non-increasing in s");
    }
    Ok(())
}

/// Indices of the upper concave envelope, collinear points dropped.
fn upper_hull(points: &[CurvePoint]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let a = &points[hull[hull.len() - 2]];
            let b = &points[hull[hull.len() - 1]];
            let cross = (b.s - a.s) * (p.r - a.r) - (b.r - a.r) * (p.s - a.s);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

impl Response for RevenueCurve {
    fn respond(&self, c: f64) -> ExchangeResponse {
        match self.refinement {
            Refinement::None => self.respond_hull(c),
            Refinement::Uniform { low, high } => {
                if c >= high {
                    return ExchangeResponse::bypass(c);
                }
                let p = (0.5 * (high + c)).max(low);
                let s = (high - p) / (high - low);
                let r = s * p;
                ExchangeResponse { survival: s, survival_max: s, reserve_price: Price::Finite(p), value: r + (1.0 - s) * c, revenue: r }
            }
            Refinement::Exponential { rate } => {
                let p = (c + 1.0 / rate).max(0.0);
                let s = (-rate * p).exp();
                let r = s * p;
                ExchangeResponse { survival: s, survival_max: s, reserve_price: Price::Finite(p), value: r + (1.0 - s) * c, revenue: r }
            }
            Refinement::LogNormal { mu, sigma } => self.respond_lognormal(mu, sigma, c),
        }
    }

    fn respond_greatest(&self, c: f64) -> ExchangeResponse {
        let r = self.respond(c);
        if !matches!(self.refinement, Refinement::None) || r.survival_max <= r.survival {
            return r;
        }
        let b = &self.points[self.hull[self.hull_maximizers(c).1]];
        ExchangeResponse { survival: b.s, survival_max: b.s, reserve_price: b.p, value: r.value, revenue: b.r }
    }

    fn kinks(&self) -> Vec<f64> {
        match self.refinement {
            Refinement::None => self.slopes.clone(),
            Refinement::Uniform { low, high } => vec![2.0 * low - high, high],
            Refinement::Exponential { rate } => vec![-1.0 / rate],
            Refinement::LogNormal { .. } => Vec::new(),
        }
    }

    fn sell(&self, response: &ExchangeResponse, rng: &mut dyn RngCore) -> Option<f64> {
        if let Some(BidModel::SecondPrice { law, bidders }) = &self.model {
            let Price::Finite(p) = response.reserve_price else {
                return None;
            };
            let bids = super::bid::draw_auction(law, *bidders, rng);
            return (bids.highest >= p).then(|| bids.second_highest.max(p));
        }
        if response.survival <= 0.0 {
            return None;
        }
        let u: f64 = rand::Rng::gen(rng);
        (u < response.survival).then(|| response.revenue / response.survival)
    }
}

/// Optimal response at opportunity cost `c` (least maximizer).
pub fn optimal_response(curve: &RevenueCurve, c: f64) -> ExchangeResponse {
    curve.respond(c)
}

/// Root of `(1 - F(p)) / f(p) = p - c` for increasing-failure-rate bid laws.
pub fn reserve_from_hazard(model: &BidModel, c: f64) -> Result<Price> {
    let law = match model {
        BidModel::SingleBidder { law } | BidModel::SecondPrice { law, .. } => law,
        _ => return Err(Error::Unsupported("hazard-rate reserve needs a parametric bid law".into())),
    };
    if !law.has_increasing_failure_rate() {
        return Err(Error::Unsupported("hazard-rate reserve needs an increasing failure rate".into()));
    }
    let p0 = law.lower();
    let top = law.null_price();
    if let Some(pinf) = top {
        if c >= pinf {
            return Ok(Price::RejectAll);
        }
    }
    if c < p0 - 1.0 / law.pdf(p0) {
        return Ok(Price::Finite(p0));
    }
    let residual = |p: f64| p - c - law.survival(p) / law.pdf(p);
    let mut lo = p0;
    let mut hi = match top {
        Some(pinf) => pinf,
        None => {
            let mut h = p0.max(c) + 1.0;
            while residual(h) < 0.0 {
                h = 2.0 * h + 1.0;
            }
            h
        }
    };
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Price::Finite(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exchange::bid::BidSample;
    use crate::exchange::response::apply_revenue_share;

    fn uniform() -> BidModel {
        BidModel::SingleBidder { law: BidLaw::Uniform { low: 0.0, high: 1.0 } }
    }

    #[test]
    fn null_curve_is_zero() {
        let curve = RevenueCurve::build(&BidModel::Null, 100).unwrap();
        assert!(curve.points().iter().all(|p| p.r == 0.0));
        let r = curve.respond(7.0);
        assert_eq!((r.survival, r.reserve_price, r.value), (0.0, Price::RejectAll, 7.0));
        assert!(curve.check_regularity().regular);
    }

    #[test]
    fn uniform_grid_values() {
        let curve = RevenueCurve::build(&uniform(), 101).unwrap();
        let mid = curve.points()[50];
        assert_eq!(mid.s, 0.5);
        assert_eq!(mid.p, Price::Finite(0.5));
        assert_eq!(mid.r, 0.25);
        let rep = curve.check_regularity();
        assert!(rep.regular);
        assert!(rep.max_concavity_violation <= 0.0);
    }

    #[test]
    fn uniform_responses() {
        let curve = RevenueCurve::build(&uniform(), 100).unwrap();
        let r = curve.respond(0.0);
        assert!((r.survival - 0.5).abs() < 1e-15 && (r.value - 0.25).abs() < 1e-15);
        assert_eq!(r.reserve_price, Price::Finite(0.5));
        let r = curve.respond(0.5);
        assert!((r.survival - 0.25).abs() < 1e-15);
        assert_eq!(r.reserve_price, Price::Finite(0.75));
        assert!((r.value - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn revenue_share_examples() {
        let curve = RevenueCurve::build(&uniform(), 100).unwrap();
        assert_eq!(apply_revenue_share(&curve, 0.0, 0.3).unwrap(), curve.respond(0.3));
        let r = apply_revenue_share(&curve, 0.5, 0.25).unwrap();
        assert_eq!(r.reserve_price, Price::Finite(0.75));
        assert!((r.value - 0.28125).abs() < 1e-15);
        let null = RevenueCurve::null();
        assert_eq!(apply_revenue_share(&null, 0.5, 1.0).unwrap().value, 1.0);
    }

    #[test]
    fn hazard_reserve_examples() {
        let m = uniform();
        let Price::Finite(p) = reserve_from_hazard(&m, 0.0).unwrap() else { panic!() };
        assert!((p - 0.5).abs() < 1e-9);
        assert_eq!(reserve_from_hazard(&m, 2.0).unwrap(), Price::RejectAll);
        assert_eq!(reserve_from_hazard(&m, -2.0).unwrap(), Price::Finite(0.0));
        let lognormal = BidModel::SingleBidder { law: BidLaw::LogNormal { mu: 0.0, sigma: 1.0 } };
        assert!(matches!(reserve_from_hazard(&lognormal, 0.0), Err(Error::Unsupported(_))));
        assert!(matches!(reserve_from_hazard(&BidModel::Null, 0.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exponential_reserve_matches_hazard_root() {
        let m = BidModel::SingleBidder { law: BidLaw::Exponential { rate: 2.0 } };
        let curve = RevenueCurve::build(&m, 100).unwrap();
        for c in [-1.0, -0.2, 0.0, 0.7, 3.0] {
            let hazard = reserve_from_hazard(&m, c).unwrap().as_f64();
            let direct = curve.respond(c).reserve_price.as_f64();
            assert!((hazard - direct).abs() < 2e-9, "c={c}: {hazard} vs {direct}");
        }
    }

    #[test]
    fn lognormal_refinement_solves_first_order_condition() {
        let law = BidLaw::LogNormal { mu: 0.1, sigma: 0.6 };
        let curve = RevenueCurve::build(&BidModel::SingleBidder { law: law.clone() }, 50).unwrap();
        for c in [0.0, 0.5, 1.5] {
            let r = curve.respond(c);
            // virtual value p - (1 - F)/f equals c at the optimum
            let p = r.reserve_price.as_f64();
            let virt = p - law.survival(p) / law.pdf(p);
            assert!((virt - c).abs() < 1e-8, "c={c}: {virt}");
            let best_grid = curve.points().iter().map(|q| q.r + (1.0 - q.s) * c).fold(f64::MIN, f64::max);
            assert!(r.value >= best_grid - 1e-12);
        }
    }

    #[test]
    fn discrete_bids_use_atom_grid() {
        let m = BidModel::SingleBidder { law: BidLaw::Discrete { values: vec![0.2, 0.6], probs: vec![0.5, 0.5] } };
        let curve = RevenueCurve::build(&m, 100).unwrap();
        let s: Vec<f64> = curve.points().iter().map(|p| p.s).collect();
        assert_eq!(s, vec![0.0, 0.5, 1.0]);
        let r = curve.respond(0.0);
        assert_eq!(r.reserve_price, Price::Finite(0.6));
        assert!((r.value - 0.3).abs() < 1e-15);
    }

    #[test]
    fn flat_segment_returns_least_maximizer() {
        let pts = vec![
            CurvePoint { s: 0.0, p: Price::RejectAll, r: 0.0 },
            CurvePoint { s: 0.5, p: Price::Finite(1.0), r: 0.5 },
            CurvePoint { s: 1.0, p: Price::Finite(0.5), r: 0.5 },
        ];
        let curve = RevenueCurve::from_points(pts).unwrap();
        let r = curve.respond(0.0);
        assert_eq!((r.survival, r.survival_max), (0.5, 1.0));
    }

    #[test]
    fn empirical_curve_and_report() {
        let samples = Arc::new(vec![BidSample::new(5.0, 3.0).unwrap(), BidSample::new(2.0, 1.0).unwrap()]);
        let curve = RevenueCurve::build(&BidModel::Empirical { samples }, 11).unwrap();
        let rep = curve.check_regularity();
        assert!(rep.max_concavity_violation >= 0.0);
        assert_eq!(rep.origin_gap, 0.0);
        // lower (1 - s) quantile: 5 for s < 0.5, 2 from s = 0.5 on
        let p = curve.points()[4];
        assert_eq!((p.p, p.r), (Price::Finite(5.0), 2.5));
        let p = curve.points()[5];
        assert_eq!((p.p, p.r), (Price::Finite(2.0), 2.5));
    }

    #[test]
    fn second_price_curve_is_consistent() {
        let law = BidLaw::Uniform { low: 0.0, high: 1.0 };
        let curve = RevenueCurve::build(&BidModel::SecondPrice { law, bidders: 2 }, 21).unwrap();
        for pt in curve.points().iter().skip(1) {
            let p = pt.p.as_f64();
            let exact = p * p - 4.0 * p * p * p / 3.0 + 1.0 / 3.0;
            assert!((pt.r - exact).abs() < 1e-12);
            assert!((1.0 - p * p - pt.s).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let curve = RevenueCurve::build(&uniform(), 5).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,p,r\n0,reject_all,0\n"));
        let back = RevenueCurve::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.points(), curve.points());
    }

    #[test]
    fn invalid_curves_are_rejected() {
        let pts = vec![
            CurvePoint { s: 0.0, p: Price::RejectAll, r: 0.1 },
            CurvePoint { s: 1.0, p: Price::Finite(0.0), r: 0.0 },
        ];
        assert!(RevenueCurve::from_points(pts).is_err());
        assert!(RevenueCurve::build(&uniform(), 1).is_err());
    }
}
