use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Reserve price offered to the exchange. `RejectAll` is the null price: no
/// bid clears it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Price {
    Finite(f64),
    RejectAll,
}

pub const REJECT_ALL_LABEL: &str = "reject_all";

impl Price {
    /// Numeric view, with the null price mapped to `+inf` so that comparisons
    /// order it above every finite reserve.
    pub fn as_f64(&self) -> f64 {
        match self {
            Price::Finite(p) => *p,
            Price::RejectAll => f64::INFINITY,
        }
    }

    pub fn is_reject_all(&self) -> bool {
        matches!(self, Price::RejectAll)
    }

    pub fn parse(text: &str) -> Result<Price> {
        let t = text.trim();
        if t == REJECT_ALL_LABEL {
            return Ok(Price::RejectAll);
        }
        t.parse::<f64>()
            .map(Price::Finite)
            .map_err(|_| Error::Config(format!("cannot parse price '{t}'")))
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Price::Finite(p) => write!(f, "{p}"),
            Price::RejectAll => f.write_str(REJECT_ALL_LABEL),
        }
    }
}

impl Serialize for Price {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Price::Finite(p) => s.serialize_f64(*p),
            Price::RejectAll => s.serialize_str(REJECT_ALL_LABEL),
        }
    }
}

impl<'de> Deserialize<'de> for Price {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Price::Finite(p)),
            Raw::Text(t) => Price::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// Solution of `max_s r(s) + (1 - s) c` at one opportunity cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeResponse {
    /// Least maximizer `s*(c)`.
    pub survival: f64,
    /// Greatest maximizer; differs from `survival` only at kinks.
    pub survival_max: f64,
    pub reserve_price: Price,
    /// `R(c)`.
    pub value: f64,
    /// Expected exchange revenue `r(s*)`.
    pub revenue: f64,
}

impl ExchangeResponse {
    /// The impression is never offered: value `c`, nothing sold.
    pub fn bypass(c: f64) -> Self {
        ExchangeResponse { survival: 0.0, survival_max: 0.0, reserve_price: Price::RejectAll, value: c, revenue: 0.0 }
    }
}

/// Anything that answers the publisher's pricing problem at a given
/// opportunity cost.
pub trait Response: Send + Sync {
    fn respond(&self, c: f64) -> ExchangeResponse;

    /// Same value, but at a kink the greatest maximizer and its reserve.
    fn respond_greatest(&self, c: f64) -> ExchangeResponse {
        self.respond(c)
    }

    /// Opportunity costs at which the response is not smooth.
    fn kinks(&self) -> Vec<f64>;

    /// Draws the exchange outcome for a submitted impression; returns the
    /// publisher's payment when the impression is sold.
    fn sell(&self, response: &ExchangeResponse, rng: &mut dyn RngCore) -> Option<f64> {
        if response.survival <= 0.0 {
            return None;
        }
        let u: f64 = rng.gen();
        (u < response.survival).then(|| response.revenue / response.survival)
    }
}

/// No exchange at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bypass;

impl Response for Bypass {
    fn respond(&self, c: f64) -> ExchangeResponse {
        ExchangeResponse::bypass(c)
    }

    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// The exchange keeps a fraction `alpha` of every payment.
pub struct SharedExchange<'a, E: Response + ?Sized> {
    inner: &'a E,
    alpha: f64,
}

impl<'a, E: Response + ?Sized> SharedExchange<'a, E> {
    pub fn new(inner: &'a E, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidShare(alpha));
        }
        Ok(SharedExchange { inner, alpha })
    }
}

impl<E: Response + ?Sized> Response for SharedExchange<'_, E> {
    fn respond(&self, c: f64) -> ExchangeResponse {
        let keep = 1.0 - self.alpha;
        let inner = self.inner.respond(c / keep);
        ExchangeResponse { value: keep * inner.value, revenue: keep * inner.revenue, ..inner }
    }

    fn respond_greatest(&self, c: f64) -> ExchangeResponse {
        let keep = 1.0 - self.alpha;
        let inner = self.inner.respond_greatest(c / keep);
        ExchangeResponse { value: keep * inner.value, revenue: keep * inner.revenue, ..inner }
    }

    fn kinks(&self) -> Vec<f64> {
        let keep = 1.0 - self.alpha;
        self.inner.kinks().into_iter().map(|k| k * keep).collect()
    }

    fn sell(&self, response: &ExchangeResponse, rng: &mut dyn RngCore) -> Option<f64> {
        let keep = 1.0 - self.alpha;
        let gross = ExchangeResponse { revenue: response.revenue / keep, ..*response };
        self.inner.sell(&gross, rng).map(|pay| keep * pay)
    }
}

/// Revenue-shared response `(1 - alpha) R(c / (1 - alpha))`.
pub fn apply_revenue_share<E: Response + ?Sized>(exchange: &E, alpha: f64, c: f64) -> Result<ExchangeResponse> {
    Ok(SharedExchange::new(exchange, alpha)?.respond(c))
}

/// Offers only impressions with no positive opportunity cost, at the reserve
/// that is optimal for zero opportunity cost.
pub struct RemnantOnly<'a, E: Response + ?Sized> {
    inner: &'a E,
}

impl<'a, E: Response + ?Sized> RemnantOnly<'a, E> {
    pub fn new(inner: &'a E) -> Self {
        RemnantOnly { inner }
    }
}

impl<E: Response + ?Sized> Response for RemnantOnly<'_, E> {
    fn respond(&self, c: f64) -> ExchangeResponse {
        if c > 0.0 {
            return ExchangeResponse::bypass(c);
        }
        let at_zero = self.inner.respond(0.0);
        ExchangeResponse {
            survival_max: at_zero.survival,
            value: at_zero.revenue + (1.0 - at_zero.survival) * c,
            ..at_zero
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![0.0]
    }

    fn sell(&self, response: &ExchangeResponse, rng: &mut dyn RngCore) -> Option<f64> {
        self.inner.sell(response, rng)
    }
}
