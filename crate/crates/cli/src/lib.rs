//! Config-driven batch verification of metric families.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{parse_config, ConfigError, Format, RunConfig, Suite};
pub use report::{emit_report, to_json};
pub use runner::{run, VerificationReport};

/// Environment variable multiplying every tolerance.
pub const TOL_SCALE_ENV: &str = "TWISTORLAB_TOL_SCALE";
