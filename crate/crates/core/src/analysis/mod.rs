//! Verification tools: KKT residuals and multiplier recovery, Wardrop checks,
//! monotonicity probes, the extragradient reference oracle and the error
//! metric used in every trace.

mod checks;
mod kkt;
mod oracle;

pub use checks::{check_cwe, monotonicity_probe, monotonicity_probe_pairs, CweReport, MonotonicityReport, PROBE_NOTE};
pub use kkt::{active_set, kkt_residual, licq_rank, recover_multipliers, KktPoint, KktResidual};
pub use oracle::{error_metric, natural_residual, reference_solution, reference_solution_from, ORACLE_MAX_ITER};
