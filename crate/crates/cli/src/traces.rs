use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use cvarvi::RunTrace;

pub const TRACE_HEADER: &str = "k,gamma,N,error,wallclock_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub gamma: f64,
    pub samples: usize,
    pub error: f64,
    pub wallclock_ms: f64,
}

/// One trace file with the run identity recovered from its name.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub algorithm: String,
    pub samples: usize,
    pub seed: u64,
    pub path: PathBuf,
    pub rows: Vec<TraceRow>,
}

impl TraceFile {
    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.error)
    }
}

/// `{algorithm}_N{samples}_seed{seed}.csv`
pub fn trace_file_name(algorithm: &str, samples: usize, seed: u64) -> String {
    format!("{algorithm}_N{samples}_seed{seed}.csv")
}

pub fn parse_trace_file_name(name: &str) -> Option<(String, usize, u64)> {
    let stem = name.strip_suffix(".csv")?;
    let (rest, seed) = stem.rsplit_once("_seed")?;
    let (algorithm, samples) = rest.rsplit_once("_N")?;
    if algorithm.is_empty() {
        return None;
    }
    Some((algorithm.to_string(), samples.parse().ok()?, seed.parse().ok()?))
}

/// CSV text of a run. `wallclock_ms` is zero unless `timing` is set, so that
/// reruns reproduce the file byte for byte.
pub fn trace_csv(trace: &RunTrace, timing: bool) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let error = r.map_error.unwrap_or(f64::NAN);
        let ms = if timing { r.wall_clock.as_secs_f64() * 1e3 } else { 0.0 };
        writeln!(out, "{},{},{},{},{}", r.k, r.gamma, r.samples, error, ms).unwrap();
    }
    out
}

pub fn parse_trace_csv(text: &str) -> anyhow::Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => bail!("expected header {TRACE_HEADER:?}, found {other:?}"),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            bail!("line {}: expected 5 fields, found {}", i + 2, f.len());
        }
        let bad = |what: &str| format!("line {}: bad {what}", i + 2);
        rows.push(TraceRow {
            k: f[0].trim().parse().with_context(|| bad("k"))?,
            gamma: f[1].trim().parse().with_context(|| bad("gamma"))?,
            samples: f[2].trim().parse().with_context(|| bad("N"))?,
            error: f[3].trim().parse().with_context(|| bad("error"))?,
            wallclock_ms: f[4].trim().parse().with_context(|| bad("wallclock_ms"))?,
        });
    }
    Ok(rows)
}

/// Every trace in `dir` whose name follows [`trace_file_name`], sorted by
/// algorithm, sample size and seed.
pub fn read_trace_dir(dir: &Path) -> anyhow::Result<Vec<TraceFile>> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        let Some((algorithm, samples, seed)) = path.file_name().and_then(|n| n.to_str()).and_then(parse_trace_file_name) else {
            continue;
        };
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let rows = parse_trace_csv(&text).with_context(|| format!("in {}", path.display()))?;
        out.push(TraceFile { algorithm, samples, seed, path, rows });
    }
    out.sort_by(|a, b| (&a.algorithm, a.samples, a.seed).cmp(&(&b.algorithm, b.samples, b.seed)));
    Ok(out)
}
