use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use cvarvi::algorithms::{run_multiplier, run_projected, run_subspace, Algorithm, TerminalStatus};
use cvarvi::analysis::{natural_residual, reference_solution};
use cvarvi::{Problem, RunTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{sha256_hex, ConfigError, ExperimentConfig};
use crate::traces::{trace_csv, trace_file_name};

pub const SEED_OFFSET_VAR: &str = "CVARVI_SEED_OFFSET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Upper bound on runs executing at once.
    pub jobs: usize,
    /// Added to every configured seed.
    pub seed_offset: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { jobs: 1, seed_offset: 0 }
    }
}

/// Reads the seed offset from the environment; unset means 0.
pub fn seed_offset_from_env() -> Result<u64, ConfigError> {
    match std::env::var(SEED_OFFSET_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("{SEED_OFFSET_VAR} must be a nonnegative integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(ConfigError::Invalid(format!("{SEED_OFFSET_VAR}: {e}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        Some(Stats {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub samples: usize,
    pub file: String,
    pub status: String,
    pub iterations: usize,
    pub terminal_error: Option<f64>,
    pub clamp_events: usize,
    pub projection_calls: usize,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub samples: usize,
    pub runs: usize,
    pub completed: usize,
    pub diverged: usize,
    pub failed: usize,
    /// Over runs that recorded an error value.
    pub terminal_error: Option<Stats>,
    pub iterations: Stats,
    pub clamp_events: usize,
    pub projection_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub key: String,
    pub tol: f64,
    pub natural_residual: f64,
    pub from_cache: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub problem: String,
    pub algorithm: String,
    pub max_iter: usize,
    pub seed_offset: u64,
    pub reference: ReferenceSummary,
    pub groups: Vec<GroupSummary>,
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub summary_path: PathBuf,
    pub trace_paths: Vec<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct CachedReference {
    key: String,
    problem: String,
    tol: f64,
    h: Vec<f64>,
}

/// `h*` for the problem, from the cache when an entry with the same key
/// exists. The key hashes the canonical problem text and the tolerance.
pub fn cached_reference(cfg: &ExperimentConfig, problem: &Problem) -> anyhow::Result<(Vec<f64>, ReferenceSummary)> {
    let canonical = cfg.problem.canonical();
    let key = sha256_hex(format!("{canonical};tol={:?}", cfg.reference_tol).as_bytes());
    let path = cfg.cache_dir.join(format!("hstar-{key}.json"));
    let cached = fs::read_to_string(&path)
        .ok()
        .and_then(|text| serde_json::from_str::<CachedReference>(&text).ok())
        .filter(|c| c.key == key && c.h.len() == problem.n());
    let (h, from_cache) = match cached {
        Some(c) => (c.h, true),
        None => {
            let h = reference_solution(problem, cfg.reference_tol)
                .map_err(|e| anyhow!("reference solution for {}: {e}", cfg.problem.label()))?;
            fs::create_dir_all(&cfg.cache_dir).with_context(|| format!("cannot create {}", cfg.cache_dir.display()))?;
            let entry = CachedReference { key: key.clone(), problem: canonical, tol: cfg.reference_tol, h: h.clone() };
            write_atomic(&path, serde_json::to_string_pretty(&entry)?.as_bytes())?;
            (h, false)
        }
    };
    let residual = natural_residual(problem, &h)?;
    Ok((h, ReferenceSummary { key, tol: cfg.reference_tol, natural_residual: residual, from_cache }))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn run_one(cfg: &ExperimentConfig, problem: &Problem, f_star: &[f64], samples: usize, seed: u64) -> cvarvi::Result<RunTrace> {
    let c = cfg.algorithm_config(samples, seed, problem.n()).with_reference(f_star.to_vec());
    let h0 = &problem.default_start;
    match cfg.algorithm {
        Algorithm::Projected => run_projected(problem, &c, h0),
        Algorithm::Subspace => run_subspace(problem, &c, h0),
        Algorithm::Multiplier => run_multiplier(problem, &c, h0, &vec![0.0; problem.feasible.constraints().len()]),
    }
}

/// Runs every (sample size, seed) pair, writes one CSV trace per run and a
/// `summary.json` once all runs have finished.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> anyhow::Result<ExperimentOutcome> {
    let problem = cfg.problem.build().map_err(|e| anyhow!("building {}: {e}", cfg.problem.label()))?;
    let (h_star, reference) = cached_reference(cfg, &problem)?;
    let f_star = problem.exact(&h_star)?;
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("cannot create {}", cfg.output_dir.display()))?;

    let jobs: Vec<(usize, u64)> = cfg
        .sample_sizes
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .map(|(n, s)| Ok((n, s.checked_add(opts.seed_offset).ok_or_else(|| anyhow!("seed {s} overflows with the offset"))?)))
        .collect::<anyhow::Result<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build()?;
    let results: Vec<anyhow::Result<(RunSummary, PathBuf)>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(samples, seed)| {
                let name = trace_file_name(cfg.algorithm.as_str(), samples, seed);
                let path = cfg.output_dir.join(&name);
                let summary = match run_one(cfg, &problem, &f_star, samples, seed) {
                    Ok(trace) => {
                        fs::write(&path, trace_csv(&trace, cfg.timing))
                            .with_context(|| format!("cannot write {}", path.display()))?;
                        let message = match &trace.status {
                            TerminalStatus::Error(m) => Some(m.clone()),
                            _ => None,
                        };
                        RunSummary {
                            seed,
                            samples,
                            file: name,
                            status: trace.status.label().to_string(),
                            iterations: trace.iterations,
                            terminal_error: trace.final_error(),
                            clamp_events: trace.clamp_events,
                            projection_calls: trace.projection_calls,
                            message,
                        }
                    }
                    Err(e) => return Err(anyhow!("run N = {samples}, seed {seed}: {e}")),
                };
                Ok((summary, path))
            })
            .collect()
    });
    let mut runs = Vec::with_capacity(results.len());
    let mut trace_paths = Vec::with_capacity(results.len());
    for r in results {
        let (s, p) = r?;
        runs.push(s);
        trace_paths.push(p);
    }

    let groups = cfg
        .sample_sizes
        .iter()
        .map(|&n| {
            let members: Vec<&RunSummary> = runs.iter().filter(|r| r.samples == n).collect();
            let errors: Vec<f64> = members.iter().filter_map(|r| r.terminal_error).filter(|e| e.is_finite()).collect();
            let iterations: Vec<f64> = members.iter().map(|r| r.iterations as f64).collect();
            let count = |label: &str| members.iter().filter(|r| r.status == label).count();
            GroupSummary {
                samples: n,
                runs: members.len(),
                completed: count("completed"),
                diverged: count("diverged"),
                failed: count("error"),
                terminal_error: Stats::of(&errors),
                iterations: Stats::of(&iterations).unwrap(),
                clamp_events: members.iter().map(|r| r.clamp_events).sum(),
                projection_calls: members.iter().map(|r| r.projection_calls).sum(),
            }
        })
        .collect();
    let summary = ExperimentSummary {
        name: cfg.name.clone(),
        problem: cfg.problem.label(),
        algorithm: cfg.algorithm.to_string(),
        max_iter: cfg.max_iter,
        seed_offset: opts.seed_offset,
        reference,
        groups,
        runs,
    };
    let summary_path = cfg.output_dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("cannot write {}", summary_path.display()))?;
    Ok(ExperimentOutcome { summary, summary_path, trace_paths })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        assert_eq!(Stats::of(&[]), None);
        assert_eq!(Stats::of(&[1.0, 3.0, 2.0]), Some(Stats { mean: 2.0, min: 1.0, max: 3.0 }));
    }
}
