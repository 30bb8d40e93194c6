//! Multi-pass trial runner, memory metering, advantage estimation and reports.

mod config;
mod report;
mod run;
mod trials;

pub use config::ExperimentConfig;
pub use report::{compare_to_bound, sentinel_f64, BoundComparison, SummaryRow};
pub use run::{multi_pass_run, multi_pass_run_with, MemoryReport, RunOptions, RunOutput};
pub use trials::{
    assign_arms, run_one_trial, run_trials, AdvantageReport, TrialRecord, TrialsOutcome, REPORT_CONFIDENCE,
};

pub use crate::stats::{wilson_interval, Interval};
