//! Experiment runner for the CVaR variational inequality solvers: TOML
//! configs, parallel seeded runs, CSV traces, JSON summaries, error tables
//! and plot data.

// `!(a > 0.0)` style tests are kept so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod plot;
pub mod table;
pub mod traces;

pub use config::{ConfigError, ExperimentConfig, ProblemSource, ProblemSpec};
pub use experiment::{run_experiment, seed_offset_from_env, ExperimentOutcome, ExperimentSummary, RunOptions};
pub use plot::emit_plot_data;
pub use table::{summarize_table, Table};
pub use traces::{read_trace_dir, TraceFile, TRACE_HEADER};
