//! Seeded Monte Carlo CCDF experiments.
//!
//! The partition is drawn once per experiment from `partition_seed`. Trial
//! `t` draws its symbols from ChaCha8 stream `t` of `master_seed`, so the
//! table depends only on the configuration and never on scheduling.

mod config;
mod experiment;

pub use config::{Scheme, SimConfig, SvSource, ThresholdGrid, CONFIG_KEYS};
pub use experiment::{
    interpolate_papr_at, run_experiment, run_trial, CcdfColumn, CcdfTable, Experiment, TrialOutcome,
};
