pub mod linalg;
pub mod normal;
pub mod quadrature;

pub use quadrature::{integrate, integrate_scalar, Tolerance};
