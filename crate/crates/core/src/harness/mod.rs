//! Experiment driver: region classification, trials, sweeps.

pub mod config;
pub mod region;
pub mod sweep;
pub mod trial;

pub use config::SweepConfig;
pub use region::{classify_region, RegionClass};
pub use sweep::{run_sweep, sweep, CellAggregate, SweepResults, CSV_HEADER};
pub use trial::{
    run_trial, Algorithm, Constants, Overrides, TrialRecord, TrialSpec, UsedThresholds,
};
