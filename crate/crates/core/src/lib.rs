//! Price discovery between nearby and deferred futures contracts.
//!
//! The crate turns trade ticks (real or simulated) into one-second price grids,
//! pairs the nearby contract with each deferred contract, classifies every
//! day-pair with a Johansen trace test and computes daily price discovery
//! shares (Garbade-Silber, component, information and information leadership
//! shares). The daily shares feed determinant regressions with Newey-West
//! standard errors.

pub mod cli;
pub mod config;
pub mod econ;
pub mod error;
pub mod market_data;
pub mod metrics;
pub mod regression;
pub mod synthetic;

pub use error::{Error, Result};
