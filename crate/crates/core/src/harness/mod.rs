//! Experiment configuration, runners, CSV output and the invariant suite.

pub mod check;
pub mod config;
pub mod csv;
pub mod experiments;

pub use config::ExperimentConfig;
pub use csv::ResultRecord;
pub use experiments::{fit_rate_exponent, maxnorm_experiment, run_experiment, table_d2_experiment};
