//! Advertisers, user types and the joint law of placement qualities.

pub mod atoms;
pub mod events;
pub mod feasibility;
pub mod fit;
pub mod independent;
pub mod mixture;
pub mod model;

pub use atoms::Atoms;
pub use events::{argmax_set, Active, EventMass, EventTable, Winners, OUTSIDE};
pub use feasibility::{check_type_feasibility, FeasibilityReport};
pub use fit::{fit_mixture, membership_samples};
pub use independent::Marginal;
pub use mixture::{Mixture, MixtureType};
pub use model::{Advertiser, EventOptions, MarketModel, QualityLaw, QualityVector, UserType};
