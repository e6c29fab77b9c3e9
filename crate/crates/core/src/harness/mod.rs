//! Experiment runner: single trials, multi-seed experiments, CSV results
//! and run manifests.

mod config;
mod experiment;
mod trial;

pub use config::{
    parse_key_values, DataSource, MethodSpec, Mode, RunSettings, StopRule, TrialConfig, DEFAULT_CAP,
    DEFAULT_CLIP, DEFAULT_EVAL_SUBSET, DEFAULT_FIXED_EVAL_EVERY, DEFAULT_STEPS, DEFAULT_TARGET,
    DEFAULT_TARGET_EVAL_EVERY, DEFAULT_TRIALS,
};
pub use experiment::{
    read_csv, run_experiment, summarize, write_csv, write_csv_file, CsvRow, ExperimentConfig,
    ExperimentSummary, MethodSummary, CSV_HEADER,
};
pub use trial::{load_data, run_trial, run_trial_on, EvalPoint, Failure, TrialResult};
