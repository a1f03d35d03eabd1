pub mod boundaries;
pub mod cli;
pub mod detectors;
pub mod error;
pub mod harness;
pub mod model;
pub mod poisson;
mod serde_util;

pub use error::{Error, Result};
