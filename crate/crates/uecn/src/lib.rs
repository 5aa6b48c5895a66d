//! Scenario and run-configuration files, versioned stage artifacts, the
//! staged pipeline and plot-data emission for `uecn-core`.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod plots;

pub use config::{RunConfig, ScenarioSource, Selection};
pub use error::{Error, Result};
pub use pipeline::{run_pipeline, RunOutcome, RunReport, Stage};
