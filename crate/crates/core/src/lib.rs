//! Monte Carlo and analytic tools for first-passage times of the noisy Ricker model.

// `!(x > 0.0)` is used on purpose so that NaN fails parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod hitting;
pub mod noise;
pub mod optimize;
pub mod presets;
pub mod report;
pub mod rng;
pub mod runner;
pub mod theory;

pub use error::{Error, Result};
