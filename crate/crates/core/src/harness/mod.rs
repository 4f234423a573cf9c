//! Experiment files, multi-seed orchestration, output files and the CLI.

pub mod cli;
mod config;
mod experiment;
mod output;
mod plots;
mod probes;
mod problem;
mod report;

pub use config::{
    apply_override, load_config, parse_config, Aggregate, BoundKind, CalibrationConfig, CalibrationTarget, CheckSpec,
    ExperimentConfig, FillOrVec, NoiseConfig, OutputFormat, OutputsConfig, ProblemConfig, SeedsConfig,
};
pub use experiment::{evaluate_checks, run_experiment, ExperimentOutcome};
pub use output::{read_trace_rows, trace_table, traces_from_rows, Cell, Table, TraceRow, TRACE_COLUMNS};
pub use plots::{write_noise_plot, write_trace_plot};
pub use probes::{chain_check, lemma_check, log_checkpoints, lowerbound_check, noise_probe, sandwich_probe, ProbeOutput};
pub use problem::{build_problem, BuiltProblem, Calibration};
pub use report::{Report, Verdict};
