//! Experiment harness: configuration presets, seeded run orchestration,
//! metrics persistence, run comparison and report emission, plus the
//! diagnostic chain environment.

pub mod chain;
pub mod compare;
pub mod config;
mod error;
pub mod presets;
pub mod report;
pub mod runner;
pub mod transfer_cmd;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::HarnessError;
pub use presets::{preset, shipped_configs};
