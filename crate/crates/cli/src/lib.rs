//! Batch driver: validated JSON scenarios in, CSV tables plus a metadata
//! sidecar out.

pub mod config;
pub mod experiments;
pub mod table;

pub use config::{validate, ConfigError, Experiment, ScenarioConfig};
pub use experiments::{run, RunError};
pub use table::{Cell, ResultTable};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const TOLERANCE: i32 = 3;
    pub const RESOURCE: i32 = 4;
}
