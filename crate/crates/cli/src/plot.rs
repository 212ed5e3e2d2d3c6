use std::fmt::Write as _;

use crate::traces::TraceFile;

pub const PLOT_HEADER: &str = "algorithm,N,seed,k,error,clamped";

/// Errors below this are written as this value with `clamped = 1`, so every
/// row can go on a log axis.
pub const ERROR_FLOOR: f64 = 1e-16;

/// Long-format CSV of every trace, one row per recorded iterate.
pub fn emit_plot_data(traces: &[TraceFile]) -> String {
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for t in traces {
        for r in &t.rows {
            let clamped = r.error < ERROR_FLOOR;
            let error = if clamped { ERROR_FLOOR } else { r.error };
            writeln!(out, "{},{},{},{},{},{}", t.algorithm, t.samples, t.seed, r.k, error, u8::from(clamped)).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traces::TraceRow;
    use std::collections::BTreeSet;
    use std::path::PathBuf;

    fn trace(alg: &str, errors: &[f64]) -> TraceFile {
        let rows = errors
            .iter()
            .enumerate()
            .map(|(k, &error)| TraceRow { k, gamma: 1.0, samples: 25, error, wallclock_ms: 0.0 })
            .collect();
        TraceFile { algorithm: alg.into(), samples: 25, seed: 3, path: PathBuf::new(), rows }
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(emit_plot_data(&[]), format!("{PLOT_HEADER}\n"));
    }

    #[test]
    fn labels_and_clamping() {
        let traces = [trace("projected", &[1.0, 0.0]), trace("subspace", &[0.5]), trace("multiplier", &[0.25])];
        let csv = emit_plot_data(&traces);
        let labels: BTreeSet<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(labels.len(), 3);
        assert!(csv.contains("projected,25,3,0,1,0\n"));
        assert!(csv.contains("projected,25,3,1,0.0000000000000001,1\n"));
    }
}
