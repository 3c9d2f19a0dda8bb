//! Declarative experiment runner for `ftn-core`.
//!
//! A TOML config names one experiment kind; [`runner::run_config`] executes it
//! and writes one CSV per result table plus a `meta.json` sidecar.

pub mod catalog;
pub mod config;
pub mod error;
pub mod experiments;
pub mod runner;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{LabError, LabResult};
pub use table::Table;
