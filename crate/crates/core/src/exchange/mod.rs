//! Exchange revenue curves and the publisher's pricing response.

pub mod bid;
pub mod curve;
pub mod response;

pub use bid::{draw_auction, empirical_revenue, BidLaw, BidModel, BidSample};
pub use curve::{optimal_response, reserve_from_hazard, CurvePoint, RegularityReport, RevenueCurve, DEFAULT_GRID_POINTS, KINK_TOLERANCE};
pub use response::{apply_revenue_share, Bypass, ExchangeResponse, Price, RemnantOnly, Response, SharedExchange};
