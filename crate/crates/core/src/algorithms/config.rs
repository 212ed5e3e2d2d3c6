use crate::algorithms::schedule::{DualScale, PenaltySchedule, SampleSchedule, StepSchedule};
use crate::error::{Error, Result};
use crate::geometry::DEFAULT_PROJECTION_TOL;
use crate::scalar::Real;

/// Where the map values driving the iteration come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Empirical CVaR over `Nₖ` fresh samples.
    Sampled,
    /// The problem's exact map (zero noise).
    Exact,
}

#[derive(Debug, Clone)]
pub struct AlgorithmConfig<T: Real> {
    pub step: StepSchedule<T>,
    pub samples: SampleSchedule,
    pub penalty: PenaltySchedule<T>,
    pub dual_scale: DualScale<T>,
    pub max_iter: usize,
    pub seed: u64,
    /// Box the primal iterates are kept in.
    pub safeguard_box: Option<(Vec<T>, Vec<T>)>,
    /// Upper bound on every multiplier.
    pub multiplier_cap: Option<T>,
    pub projection_tol: T,
    pub oracle: OracleMode,
    /// Lets the multiplier-driven algorithm run with non-affine `q`.
    pub allow_nonaffine: bool,
    /// `F(h*)`; when set, every record carries `‖F(hᵏ) − F(h*)‖`.
    pub reference_map: Option<Vec<T>>,
    /// Record every `record_every`-th iterate; `None` picks the default
    /// thinning.
    pub record_every: Option<usize>,
}

impl<T: Real> AlgorithmConfig<T> {
    pub fn new(step: StepSchedule<T>, samples: usize, max_iter: usize, seed: u64) -> Self {
        Self {
            step,
            samples: SampleSchedule::Constant(samples),
            penalty: PenaltySchedule::Constant(T::zero()),
            dual_scale: DualScale::Constant(T::one()),
            max_iter,
            seed,
            safeguard_box: None,
            multiplier_cap: None,
            projection_tol: T::lit(DEFAULT_PROJECTION_TOL),
            oracle: OracleMode::Sampled,
            allow_nonaffine: false,
            reference_map: None,
            record_every: None,
        }
    }

    pub fn exact(mut self) -> Self {
        self.oracle = OracleMode::Exact;
        self
    }

    pub fn with_penalty(mut self, penalty: PenaltySchedule<T>) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_dual_scale(mut self, scale: DualScale<T>) -> Self {
        self.dual_scale = scale;
        self
    }

    pub fn with_reference(mut self, f_star: Vec<T>) -> Self {
        self.reference_map = Some(f_star);
        self
    }

    pub fn with_safeguard_box(mut self, lo: Vec<T>, hi: Vec<T>) -> Self {
        self.safeguard_box = Some((lo, hi));
        self
    }

    /// `1` up to 10⁴ iterations, otherwise `⌈max_iter / 10⁴⌉`.
    pub fn stride(&self) -> usize {
        self.record_every.unwrap_or_else(|| self.max_iter.div_ceil(10_000).max(1)).max(1)
    }

    /// Checks `γᵏ > 0`, `Nₖ ≥ 1` and `ρᵏ > 0` over the whole run.
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Precondition("max_iter must be at least 1".into()));
        }
        if !(self.projection_tol > T::zero()) {
            return Err(Error::Precondition("projection tolerance must be positive".into()));
        }
        for k in 0..self.max_iter {
            let g = self.step.at(k);
            if !(g > T::zero() && g.is_finite()) {
                return Err(Error::InvalidSchedule(format!("step {g} at k = {k}")));
            }
            if self.oracle == OracleMode::Sampled && self.samples.at(k) == 0 {
                return Err(Error::InvalidSchedule(format!("zero samples at k = {k}")));
            }
            let c = self.penalty.at(k, g);
            if !(c >= T::zero() && c.is_finite()) {
                return Err(Error::InvalidSchedule(format!("penalty {c} at k = {k}")));
            }
            let r = self.dual_scale.at(k);
            if !(r > T::zero() && r.is_finite()) {
                return Err(Error::InvalidSchedule(format!("dual scale {r} at k = {k}")));
            }
        }
        if let Some((lo, hi)) = &self.safeguard_box {
            if lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                return Err(Error::Precondition("invalid safeguard box".into()));
            }
        }
        if let Some(cap) = self.multiplier_cap {
            if !(cap > T::zero()) {
                return Err(Error::Precondition("multiplier cap must be positive".into()));
            }
        }
        Ok(())
    }
}
