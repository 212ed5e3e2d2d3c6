//! Stochastic VI problems `VI(H, F)` with `F_i(h) = CVaR_α[C_i(h, ξ)]` and
//! the generators used by the experiments.

mod nash;
mod paths;
mod presets;
mod routing;
mod separable;
mod tntp;

use std::fmt;
use std::sync::Arc;

use crate::cvar::{empirical_cvar_vector, RiskLevel, SampleBatch};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::rng::RngStream;
use crate::scalar::Real;

pub use nash::{build_nash_game, NashGameSpec};
pub use paths::{yen_k_shortest_paths, Path};
pub use presets::{preset, preset_with, sioux_falls_network, PRESETS, PRESET_ALPHA, PRESET_K_PATHS, SIOUX_FALLS_NET};
pub use routing::{build_routing_game, build_routing_game_with, Edge, OdPair, RoutingMapOracle, RoutingNetwork};
pub use separable::{build_separable_game, toy1};
pub use tntp::parse_tntp;

/// Draws `count` events of the cost vector `C(h, ξ)`.
pub trait CostSampler<T: Real>: Send + Sync {
    fn sample(&self, h: &[T], count: usize, stream: &RngStream) -> Result<SampleBatch<T>>;
}

impl<T: Real, F> CostSampler<T> for F
where
    F: Fn(&[T], usize, &RngStream) -> Result<SampleBatch<T>> + Send + Sync,
{
    fn sample(&self, h: &[T], count: usize, stream: &RngStream) -> Result<SampleBatch<T>> {
        self(h, count, stream)
    }
}

/// Deterministic evaluation of `F(h)`.
pub trait ExactMap<T: Real>: Send + Sync {
    fn eval(&self, h: &[T]) -> Result<Vec<T>>;
}

impl<T: Real, F> ExactMap<T> for F
where
    F: Fn(&[T]) -> Result<Vec<T>> + Send + Sync,
{
    fn eval(&self, h: &[T]) -> Result<Vec<T>> {
        self(h)
    }
}

#[derive(Clone)]
pub struct StochasticViProblem<T: Real> {
    pub name: String,
    pub sampler: Arc<dyn CostSampler<T>>,
    pub exact_map: Option<Arc<dyn ExactMap<T>>>,
    /// Absolute accuracy of `exact_map` in the sup norm; zero for closed forms.
    pub exact_map_tolerance: T,
    pub feasible: FeasibleSet<T>,
    pub level: RiskLevel<T>,
    /// Path groups per OD pair, for Wardrop checks.
    pub od_groups: Option<Vec<Vec<usize>>>,
    pub default_start: Vec<T>,
    pub labels: Vec<(String, String)>,
}

impl<T: Real> fmt::Debug for StochasticViProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StochasticViProblem")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("alpha", &self.level.alpha())
            .field("exact_map", &self.exact_map.is_some())
            .field("feasible", &self.feasible)
            .finish()
    }
}

impl<T: Real> StochasticViProblem<T> {
    #[inline]
    pub fn n(&self) -> usize {
        self.feasible.n()
    }

    pub fn has_exact_map(&self) -> bool {
        self.exact_map.is_some()
    }

    pub fn sample(&self, h: &[T], count: usize, stream: &RngStream) -> Result<SampleBatch<T>> {
        self.check_point(h)?;
        if count == 0 {
            return Err(Error::EmptyBatch);
        }
        let batch = self.sampler.sample(h, count, stream)?;
        if batch.components() != self.n() || batch.events() != count {
            return Err(Error::DimensionMismatch(format!(
                "sampler returned {}x{}, expected {count}x{}",
                batch.events(),
                batch.components(),
                self.n()
            )));
        }
        Ok(batch)
    }

    /// `F̂^N(h)`: empirical CVaR of each component over one shared batch.
    pub fn estimate(&self, h: &[T], count: usize, stream: &RngStream) -> Result<Vec<T>> {
        empirical_cvar_vector(&self.sample(h, count, stream)?, self.level)
    }

    pub fn exact(&self, h: &[T]) -> Result<Vec<T>> {
        self.check_point(h)?;
        let map = self.exact_map.as_ref().ok_or(Error::MissingExactMap)?;
        let out = map.eval(h)?;
        if out.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("exact map returned {} entries", out.len())));
        }
        Ok(out)
    }

    pub fn label(&self, key: &str) -> Option<&str> {
        self.labels.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn check_point(&self, h: &[T]) -> Result<()> {
        if h.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("point has {} entries, problem has {}", h.len(), self.n())));
        }
        Ok(())
    }
}
