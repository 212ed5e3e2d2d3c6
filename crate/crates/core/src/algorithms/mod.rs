//! The projected, subspace-constrained and multiplier-driven stochastic
//! approximation schemes.

mod config;
mod run;
mod schedule;
mod trace;

pub use config::{AlgorithmConfig, OracleMode};
pub use run::{gated_plus, gated_plus_vec, run_multiplier, run_projected, run_subspace};
pub use schedule::{validate_step_schedule, DualScale, PenaltySchedule, SampleSchedule, ScheduleCheck, StepSchedule};
pub use trace::{Algorithm, RunTrace, TerminalStatus, TraceRecord};
