//! Dependence measures, concentration bounds and Monte Carlo checks for
//! weakly dependent time series.

pub mod bounds;
pub mod counterexample;
pub mod dependence;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matrix_bounds;
pub mod mc;
pub mod process;
pub mod registry;
pub mod rng;
pub mod scenario;
pub mod special;
pub mod ustat;

pub use error::{Error, Result};
