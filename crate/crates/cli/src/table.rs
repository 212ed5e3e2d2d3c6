use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::traces::TraceFile;

pub const WINDOW_NOTE: &str = "cell = mean error from the first iterate with error < threshold to the end of the trace, \
averaged over the seeds whose trace crosses; n/a = no seed crosses";

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("{thresholds} thresholds but {sizes} sample sizes")]
    LengthMismatch { thresholds: usize, sizes: usize },
    #[error("threshold {0} is not a positive finite number")]
    BadThreshold(f64),
}

/// Post-crossing statistics of a single trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub first_k: usize,
    pub mean_after: f64,
}

/// First iterate with error strictly below `threshold` and the mean error
/// from it to the end of the trace.
pub fn crossing(trace: &TraceFile, threshold: f64) -> Option<Crossing> {
    let i = trace.rows.iter().position(|r| r.error < threshold)?;
    let tail = &trace.rows[i..];
    Some(Crossing { first_k: tail[0].k, mean_after: tail.iter().map(|r| r.error).sum::<f64>() / tail.len() as f64 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub threshold: f64,
    pub samples: usize,
    pub traces: usize,
    pub crossed: usize,
    /// Mean over crossing seeds of the post-crossing mean error.
    pub mean_error: Option<f64>,
    /// Mean over crossing seeds of the first crossing iteration.
    pub mean_first_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<(f64, usize)>,
    pub rows: Vec<(String, Vec<Cell>)>,
}

/// One row per algorithm and one column per (threshold, sample size) pair.
pub fn summarize_table(traces: &[TraceFile], thresholds: &[f64], sizes: &[usize]) -> Result<Table, TableError> {
    if thresholds.len() != sizes.len() {
        return Err(TableError::LengthMismatch { thresholds: thresholds.len(), sizes: sizes.len() });
    }
    if let Some(&t) = thresholds.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(TableError::BadThreshold(t));
    }
    let columns: Vec<(f64, usize)> = thresholds.iter().copied().zip(sizes.iter().copied()).collect();
    let algorithms: BTreeSet<&str> = traces.iter().map(|t| t.algorithm.as_str()).collect();
    let rows = algorithms
        .into_iter()
        .map(|alg| {
            let cells = columns
                .iter()
                .map(|&(threshold, samples)| {
                    let group: Vec<&TraceFile> = traces.iter().filter(|t| t.algorithm == alg && t.samples == samples).collect();
                    let hits: Vec<Crossing> = group.iter().filter_map(|t| crossing(t, threshold)).collect();
                    let mean = |f: &dyn Fn(&Crossing) -> f64| {
                        (!hits.is_empty()).then(|| hits.iter().map(f).sum::<f64>() / hits.len() as f64)
                    };
                    Cell {
                        threshold,
                        samples,
                        traces: group.len(),
                        crossed: hits.len(),
                        mean_error: mean(&|c| c.mean_after),
                        mean_first_k: mean(&|c| c.first_k as f64),
                    }
                })
                .collect();
            (alg.to_string(), cells)
        })
        .collect();
    Ok(Table { columns, rows })
}

fn cell_text(c: &Cell) -> String {
    match c.mean_error {
        Some(e) => format!("{e:.4} ({}/{})", c.crossed, c.traces),
        None => format!("n/a (0/{})", c.traces),
    }
}

impl Table {
    /// Aligned text with the averaging window stated underneath.
    pub fn to_text(&self) -> String {
        let mut grid: Vec<Vec<String>> = Vec::with_capacity(self.rows.len() + 1);
        let mut head = vec!["algorithm".to_string()];
        head.extend(self.columns.iter().map(|(t, n)| format!("N={n} e<{t}")));
        grid.push(head);
        for (alg, cells) in &self.rows {
            let mut line = vec![alg.clone()];
            line.extend(cells.iter().map(cell_text));
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len()).map(|j| grid.iter().map(|r| r[j].len()).max().unwrap()).collect();
        let mut out = String::new();
        for row in &grid {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (s, w))| if j == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        writeln!(out, "\n{WINDOW_NOTE}; (c/t) = crossing seeds / traces").unwrap();
        out
    }

    /// Long-format CSV, one line per cell; empty fields for n/a.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("algorithm,N,threshold,traces,crossed,mean_error,mean_first_k\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (alg, cells) in &self.rows {
            for c in cells {
                writeln!(
                    out,
                    "{alg},{},{},{},{},{},{}",
                    c.samples,
                    c.threshold,
                    c.traces,
                    c.crossed,
                    opt(c.mean_error),
                    opt(c.mean_first_k)
                )
                .unwrap();
            }
        }
        out
    }

    pub fn cell(&self, algorithm: &str, samples: usize) -> Option<&Cell> {
        let (_, cells) = self.rows.iter().find(|(a, _)| a == algorithm)?;
        cells.iter().find(|c| c.samples == samples)
    }
}
