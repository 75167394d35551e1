//! Random-access performance of energy-harvesting NB-IoT devices.
//!
//! - [`energy`]: battery birth–death chain and energy availability.
//! - [`analytics`]: closed-form preamble and RACH success probabilities.
//! - [`sim`]: Monte-Carlo spatial simulator used as an independent check.
//! - [`quadrature`]: adaptive integration shared by the analytic model.

pub mod energy;
pub mod error;
pub mod quadrature;
pub mod units;
pub mod analytics;
pub mod sim;

pub use error::{Error, Result};
