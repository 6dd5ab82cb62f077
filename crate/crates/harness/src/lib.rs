//! Experiment runner for `curvopt-core`: TOML-configured solves, CSV
//! datasets, JSON reports and CSV traces, and descent-only versus
//! curvature-enabled comparison campaigns.

pub mod campaign;
pub mod compare;
pub mod config;
pub mod dataset;
pub mod error;
pub mod report;
pub mod sources;

pub use campaign::{run_campaign, write_campaign, CampaignOutcome, CampaignSpec, Strategy};
pub use compare::{compare, relative_measure, ComparisonRow};
pub use config::{Experiment, ExperimentConfig, Overrides, Variant};
pub use dataset::load_dataset;
pub use error::{HarnessError, Result};
pub use report::{execute, run_experiment, RunOutcome, RunReport};
