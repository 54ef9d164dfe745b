pub mod arith;
pub mod bsd;
pub mod curve;
pub mod error;
pub mod lfunc;
pub mod models;
pub mod numeric;
pub mod stats;
pub mod twist;

pub use error::{Error, Result};
