//! Experiment configuration, seeded execution, aggregation and result files.

mod config;
mod output;
mod runner;

pub use config::{
    log_checkpoints, CheckpointSpec, ExperimentConfig, InstanceSpec, RawConfig,
    DEFAULT_CHECKPOINTS, DEFAULT_RUCB_ALPHA,
};
pub use output::{
    resolve_out_dir, write_results, write_summary, write_traces, OutputPaths, DEFAULT_OUT_DIR,
    METADATA_FILE, OUT_DIR_ENV, SUMMARY_FILE, TRACES_FILE,
};
pub use runner::{
    aggregate, run_experiment, run_single, AggregateReport, ExperimentOutcome, RegretTrace,
};
