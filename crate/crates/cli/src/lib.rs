//! Experiment runner around `dfrc-core`: configuration files, the
//! `signal-check`, `pd-curve`, `theta-sweep` and `verify` commands, and
//! their CSV and text outputs.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_pd_curve, cmd_signal_check, cmd_theta_sweep, cmd_verify};
pub use config::{ConfigError, ExperimentConfig};
