//! Experiment driver: configuration, the slot loop, logging and summaries.

mod config;
mod env;
mod experiment;
mod metrics;
mod ne_job;
mod record;

pub use config::{ExperimentConfig, JammerMode, Scheme};
pub use env::{channel_seed, derive_seed, run_slot, Env, JammerPlayer};
pub use experiment::{run_experiment, run_seed, summarize, write_outputs, ExperimentOutput, SeedRun, SeedSummary, Summary};
pub use metrics::{mean, rolling_mean, standard_error, window_mean};
pub use ne_job::{analyze_seed, check_learned, modal_joint_action, near_certificate, run_ne_analysis, AnalysisReport, JointUnits, LearnedCheck};
pub use record::{export_csv, import_csv, read_csv, write_csv, SlotRecord, CSV_HEADER};
