#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod config;
pub mod dual;
pub mod exchange;
pub mod experiments;
pub mod flow;
pub mod fluid;
pub mod market;
pub mod numeric;
pub mod policy;
pub mod tiebreak;

pub use error::{Error, Result};
