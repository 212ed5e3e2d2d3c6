use std::fs;
use std::path::{Path, PathBuf};

use cvarvi::algorithms::{Algorithm, AlgorithmConfig, DualScale, OracleMode, PenaltySchedule, SampleSchedule, StepSchedule};
use cvarvi::cvar::RiskLevel;
use cvarvi::problems::{
    build_routing_game_with, parse_tntp, preset_with, OdPair, RoutingMapOracle, PRESETS, PRESET_ALPHA, PRESET_K_PATHS,
};
use cvarvi::Problem;
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    #[serde(default)]
    problem: RawProblem,
    #[serde(default)]
    algorithm: RawAlgorithm,
    #[serde(default)]
    step: RawStep,
    #[serde(default)]
    samples: RawSamples,
    #[serde(default)]
    penalty: RawPenalty,
    #[serde(default)]
    dual: RawDual,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    reference: RawReference,
    #[serde(default)]
    safeguard: RawSafeguard,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    preset: Option<String>,
    tntp: Option<PathBuf>,
    alpha: Option<f64>,
    k_paths: Option<usize>,
    od: Option<Vec<(usize, usize, f64)>>,
    noise_nodes: Option<Vec<usize>>,
    noise: Option<(f64, f64)>,
    map_oracle: Option<String>,
    map_samples: Option<usize>,
    map_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgorithm {
    name: Option<String>,
    oracle: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    scale: Option<f64>,
    offset: Option<f64>,
    power: Option<f64>,
    cap: Option<f64>,
    constant: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSamples {
    n: Option<OneOrMany>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPenalty {
    mode: Option<String>,
    value: Option<f64>,
    cap: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDual {
    scale: Option<f64>,
    before: Option<f64>,
    after: Option<f64>,
    switch: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    max_iter: Option<usize>,
    seeds: Option<Vec<u64>>,
    output_dir: Option<PathBuf>,
    record_every: Option<usize>,
    timing: Option<bool>,
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSafeguard {
    lo: Option<f64>,
    hi: Option<f64>,
    multiplier_cap: Option<f64>,
}

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Preset(String),
    Tntp {
        path: PathBuf,
        text: String,
        /// 1-based `(origin, destination, demand)`.
        od: Vec<(usize, usize, f64)>,
        /// 1-based nodes whose incident edges carry noise.
        noise_nodes: Vec<usize>,
        noise: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub source: ProblemSource,
    pub alpha: f64,
    pub k_paths: usize,
    pub map_oracle: RoutingMapOracle,
}

impl ProblemSpec {
    pub fn is_routing(&self) -> bool {
        match &self.source {
            ProblemSource::Preset(name) => name == "sioux_falls_cvar",
            ProblemSource::Tntp { .. } => true,
        }
    }

    pub fn label(&self) -> String {
        match &self.source {
            ProblemSource::Preset(name) => name.clone(),
            ProblemSource::Tntp { path, .. } => path.display().to_string(),
        }
    }

    pub fn build(&self) -> cvarvi::Result<Problem> {
        let level = RiskLevel::new(self.alpha)?;
        match &self.source {
            ProblemSource::Preset(name) if name == "sioux_falls_cvar" && self.map_oracle != RoutingMapOracle::ClosedForm => {
                let net = cvarvi::problems::sioux_falls_network()?;
                let mut p = build_routing_game_with(&net, self.k_paths, level, self.map_oracle)?;
                p.name = name.clone();
                Ok(p)
            }
            ProblemSource::Preset(name) => preset_with(name, level, self.k_paths),
            ProblemSource::Tntp { text, od, noise_nodes, noise, path } => {
                let zero_based = |v: usize, what: &str| {
                    v.checked_sub(1).ok_or_else(|| cvarvi::Error::InvalidNetwork(format!("{what} ids are 1-based, got 0")))
                };
                let nodes = noise_nodes.iter().map(|&v| zero_based(v, "node")).collect::<cvarvi::Result<Vec<_>>>()?;
                let pairs = od
                    .iter()
                    .map(|&(o, d, demand)| {
                        Ok(OdPair { origin: zero_based(o, "origin")?, destination: zero_based(d, "destination")?, demand })
                    })
                    .collect::<cvarvi::Result<Vec<_>>>()?;
                let net = parse_tntp::<f64>(text)?.with_noise_at_nodes(&nodes, noise.0, noise.1)?.with_od_pairs(pairs)?;
                let mut p = build_routing_game_with(&net, self.k_paths, level, self.map_oracle)?;
                p.name = path.display().to_string();
                Ok(p)
            }
        }
    }

    /// Stable text identifying the problem; network files enter by content.
    pub fn canonical(&self) -> String {
        let oracle = match self.map_oracle {
            RoutingMapOracle::ClosedForm => "closed_form".to_string(),
            RoutingMapOracle::MonteCarlo { samples, seed } => format!("monte_carlo:{samples}:{seed}"),
        };
        let source = match &self.source {
            ProblemSource::Preset(name) => format!("preset={name}"),
            ProblemSource::Tntp { text, od, noise_nodes, noise, .. } => {
                format!("tntp={};od={od:?};noise_nodes={noise_nodes:?};noise={noise:?}", sha256_hex(text.as_bytes()))
            }
        };
        format!("{source};alpha={:?};k_paths={};map={oracle}", self.alpha, self.k_paths)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A validated experiment: one problem, one algorithm, a grid of sample
/// sizes and seeds.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    pub oracle: OracleMode,
    pub step: StepSchedule<f64>,
    pub penalty: PenaltySchedule<f64>,
    pub dual_scale: DualScale<f64>,
    pub sample_sizes: Vec<usize>,
    pub max_iter: usize,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub record_every: Option<usize>,
    pub timing: bool,
    pub cache_dir: PathBuf,
    pub reference_tol: f64,
    pub safeguard: Option<(f64, f64)>,
    pub multiplier_cap: Option<f64>,
}

/// Schedules a problem family runs with unless the config overrides them.
struct Defaults {
    step: (f64, f64, f64, Option<f64>),
    max_iter: usize,
    penalty: PenaltySchedule<f64>,
    dual: DualScale<f64>,
    reference_tol: f64,
}

fn defaults(routing: bool, algorithm: Algorithm) -> Defaults {
    if routing {
        match algorithm {
            Algorithm::Projected => Defaults {
                step: (100.0, 100.0, 1.0, None),
                max_iter: 1_000,
                penalty: PenaltySchedule::Constant(0.0),
                dual: DualScale::Constant(1.0),
                reference_tol: 1e-6,
            },
            Algorithm::Subspace => Defaults {
                step: (200.0, 200.0, 1.0, None),
                max_iter: 50_000,
                penalty: PenaltySchedule::InverseStepCapped { cap: 200.0 },
                dual: DualScale::Constant(1.0),
                reference_tol: 1e-6,
            },
            Algorithm::Multiplier => Defaults {
                step: (100.0, 100.0, 1.0, Some(0.5)),
                max_iter: 100_000,
                penalty: PenaltySchedule::Constant(0.0),
                dual: DualScale::Switch { before: 2.0, after: 0.5, at: 1_000 },
                reference_tol: 1e-6,
            },
        }
    } else {
        Defaults {
            step: (0.5, 1.0, 1.0, None),
            max_iter: match algorithm {
                Algorithm::Projected => 500,
                Algorithm::Subspace => 5_000,
                Algorithm::Multiplier => 10_000,
            },
            penalty: PenaltySchedule::Constant(200.0),
            dual: DualScale::Constant(1.0),
            reference_tol: 1e-8,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Parses a config; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        let problem = resolve_problem(&raw.problem, base)?;
        let algorithm = match raw.algorithm.name.as_deref() {
            Some(s) => s.parse::<Algorithm>().map_err(|e| ConfigError::Invalid(e.to_string()))?,
            None => return invalid("algorithm.name is required"),
        };
        let oracle = match raw.algorithm.oracle.as_deref().unwrap_or("sampled") {
            "sampled" => OracleMode::Sampled,
            "exact" => OracleMode::Exact,
            other => return invalid(format!("algorithm.oracle must be \"sampled\" or \"exact\", got {other:?}")),
        };
        let d = defaults(problem.is_routing(), algorithm);

        let step = match raw.step.constant {
            Some(g) => {
                if raw.step.scale.is_some() || raw.step.offset.is_some() || raw.step.power.is_some() {
                    return invalid("step.constant excludes step.scale, step.offset and step.power");
                }
                StepSchedule::Constant(g)
            }
            None => StepSchedule::Power {
                scale: raw.step.scale.unwrap_or(d.step.0),
                offset: raw.step.offset.unwrap_or(d.step.1),
                power: raw.step.power.unwrap_or(d.step.2),
                cap: raw.step.cap.or(d.step.3),
            },
        };

        let penalty = match raw.penalty.mode.as_deref() {
            None => match (raw.penalty.value, raw.penalty.cap) {
                (None, None) => d.penalty,
                (Some(v), None) => PenaltySchedule::Constant(v),
                (None, Some(cap)) => PenaltySchedule::InverseStepCapped { cap },
                (Some(_), Some(_)) => return invalid("penalty.value and penalty.cap are exclusive without penalty.mode"),
            },
            Some("none") => PenaltySchedule::Constant(0.0),
            Some("constant") => match raw.penalty.value {
                Some(v) => PenaltySchedule::Constant(v),
                None => return invalid("penalty.mode = \"constant\" needs penalty.value"),
            },
            Some("inverse_step_capped") => match raw.penalty.cap {
                Some(cap) => PenaltySchedule::InverseStepCapped { cap },
                None => return invalid("penalty.mode = \"inverse_step_capped\" needs penalty.cap"),
            },
            Some(other) => return invalid(format!("unknown penalty.mode {other:?}")),
        };

        let dual_scale = match (raw.dual.scale, raw.dual.before, raw.dual.after, raw.dual.switch) {
            (None, None, None, None) => d.dual,
            (Some(s), None, None, None) => DualScale::Constant(s),
            (None, Some(before), Some(after), Some(at)) => DualScale::Switch { before, after, at },
            _ => return invalid("dual takes either dual.scale or all of dual.before, dual.after, dual.switch"),
        };

        let sample_sizes = match raw.samples.n {
            None if oracle == OracleMode::Exact => vec![0],
            None => vec![25],
            Some(OneOrMany::One(n)) => vec![n],
            Some(OneOrMany::Many(v)) => v,
        };
        if sample_sizes.is_empty() {
            return invalid("samples.n must not be empty");
        }
        if oracle == OracleMode::Sampled && sample_sizes.contains(&0) {
            return invalid("samples.n must be at least 1 in sampled mode");
        }

        let seeds = raw.run.seeds.unwrap_or_default();
        if seeds.is_empty() {
            return invalid("run.seeds must list at least one seed");
        }
        let max_iter = raw.run.max_iter.unwrap_or(d.max_iter);
        if max_iter == 0 {
            return invalid("run.max_iter must be at least 1");
        }
        if raw.run.record_every == Some(0) {
            return invalid("run.record_every must be at least 1");
        }
        let output_dir = match raw.run.output_dir {
            Some(p) => base.join(p),
            None => return invalid("run.output_dir is required"),
        };
        let cache_dir = raw.run.cache_dir.map(|p| base.join(p)).unwrap_or_else(|| output_dir.join(".cache"));

        let reference_tol = raw.reference.tol.unwrap_or(d.reference_tol);
        if !(reference_tol > 0.0) {
            return invalid("reference.tol must be positive");
        }
        let safeguard = match (raw.safeguard.lo, raw.safeguard.hi) {
            (None, None) => None,
            (Some(lo), Some(hi)) if lo < hi => Some((lo, hi)),
            (Some(_), Some(_)) => return invalid("safeguard.lo must be below safeguard.hi"),
            _ => return invalid("safeguard.lo and safeguard.hi go together"),
        };
        if raw.safeguard.multiplier_cap.is_some_and(|c| !(c > 0.0)) {
            return invalid("safeguard.multiplier_cap must be positive");
        }

        let cfg = ExperimentConfig {
            name: raw.name.unwrap_or_else(|| format!("{}-{}", problem.label(), algorithm)),
            problem,
            algorithm,
            oracle,
            step,
            penalty,
            dual_scale,
            sample_sizes,
            max_iter,
            seeds,
            output_dir,
            record_every: raw.run.record_every,
            timing: raw.run.timing.unwrap_or(false),
            cache_dir,
            reference_tol,
            safeguard,
            multiplier_cap: raw.safeguard.multiplier_cap,
        };
        for &n in &cfg.sample_sizes {
            cfg.algorithm_config(n, 0, 0).validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// The solver settings of one run; `n` is the problem dimension, used to
    /// size the safeguard box.
    pub fn algorithm_config(&self, samples: usize, seed: u64, n: usize) -> AlgorithmConfig<f64> {
        let mut c = AlgorithmConfig::new(self.step.clone(), samples, self.max_iter, seed)
            .with_penalty(self.penalty.clone())
            .with_dual_scale(self.dual_scale.clone());
        c.samples = SampleSchedule::Constant(samples);
        c.oracle = self.oracle;
        c.record_every = self.record_every;
        c.multiplier_cap = self.multiplier_cap;
        if let Some((lo, hi)) = self.safeguard {
            c = c.with_safeguard_box(vec![lo; n], vec![hi; n]);
        }
        c
    }
}

fn resolve_problem(raw: &RawProblem, base: &Path) -> Result<ProblemSpec> {
    let alpha = raw.alpha.unwrap_or(PRESET_ALPHA);
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid(format!("problem.alpha must lie in (0, 1], got {alpha}"));
    }
    let k_paths = raw.k_paths.unwrap_or(PRESET_K_PATHS);
    if k_paths == 0 {
        return invalid("problem.k_paths must be at least 1");
    }
    let map_oracle = match raw.map_oracle.as_deref().unwrap_or("closed_form") {
        "closed_form" => {
            if raw.map_samples.is_some() || raw.map_seed.is_some() {
                return invalid("problem.map_samples and problem.map_seed need problem.map_oracle = \"monte_carlo\"");
            }
            RoutingMapOracle::ClosedForm
        }
        "monte_carlo" => {
            RoutingMapOracle::MonteCarlo { samples: raw.map_samples.unwrap_or(1_000_000), seed: raw.map_seed.unwrap_or(0) }
        }
        other => return invalid(format!("unknown problem.map_oracle {other:?}")),
    };
    let source = match (&raw.preset, &raw.tntp) {
        (Some(name), None) => {
            if !PRESETS.iter().any(|(n, _)| n == name) {
                return invalid(format!("unknown preset {name:?}"));
            }
            if raw.od.is_some() || raw.noise_nodes.is_some() || raw.noise.is_some() {
                return invalid("problem.od, problem.noise_nodes and problem.noise apply to TNTP networks only");
            }
            if name != "sioux_falls_cvar" && map_oracle != RoutingMapOracle::ClosedForm {
                return invalid(format!("preset {name:?} has a closed-form map only"));
            }
            ProblemSource::Preset(name.clone())
        }
        (None, Some(path)) => {
            let path = base.join(path);
            let text =
                fs::read_to_string(&path).map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
            let od = match &raw.od {
                Some(od) if !od.is_empty() => od.clone(),
                _ => return invalid("a TNTP problem needs problem.od"),
            };
            ProblemSource::Tntp {
                path,
                text,
                od,
                noise_nodes: raw.noise_nodes.clone().unwrap_or_default(),
                noise: raw.noise.unwrap_or((0.0, 0.5)),
            }
        }
        (Some(_), Some(_)) => return invalid("problem.preset and problem.tntp are exclusive"),
        (None, None) => return invalid("problem.preset or problem.tntp is required"),
    };
    Ok(ProblemSpec { source, alpha, k_paths, map_oracle })
}
