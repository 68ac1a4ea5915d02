//! Configuration, validation and the experiment runner behind the
//! `meanfield` binary.

pub mod config;
pub mod runner;

pub use config::{ExperimentKind, Format, RunConfig, Violation, ViolationKind};
pub use runner::{run, Computed, Manifest, RunError, RunSummary};
