//! Experiment plumbing: problem generation, presets, config files, paired
//! replications and trace persistence, plus the codec and feasibility
//! self-checks behind the command-line tool.

pub mod config;
pub mod experiment;
pub mod problem;
pub mod selftest;
pub mod trace;

pub use config::{ConfigChoice, ExperimentConfig, MatrixSource, PhaseSpec, Preset, ProblemSpec, ValidatedExperiment};
pub use experiment::{
    run_experiment, run_replication, write_outputs, AlgorithmStats, ExperimentReport, ExperimentSummary,
    ReplicationResult, RunSummary,
};
pub use problem::{derive_seed, random_problem, MatrixKind};
pub use trace::{format_float, parse_trace, TraceRow, TRACE_HEADER};
