//! Sweep runner behind the `nbiot-rach` command.

pub mod config;
pub mod error;
pub mod output;
pub mod preset;
pub mod sweep;

pub use config::RunConfig;
pub use error::CliError;
pub use preset::{build, Engine, SweepSpec, Target};
pub use sweep::{run_sweep, SweepTable};
