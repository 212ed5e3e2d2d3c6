use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

type Custom<T> = Arc<dyn Fn(usize) -> T + Send + Sync>;

/// Step sizes `γᵏ`.
#[derive(Clone)]
pub enum StepSchedule<T> {
    /// `min(scale / (offset + k)^power, cap)`
    Power {
        scale: T,
        offset: T,
        power: T,
        cap: Option<T>,
    },
    Constant(T),
    Custom(Custom<T>),
}

impl<T: Real> StepSchedule<T> {
    /// `a / (a + k)^p`
    pub fn harmonic(a: T, p: T) -> Self {
        StepSchedule::Power { scale: a, offset: a, power: p, cap: None }
    }

    pub fn with_cap(self, cap: T) -> Self {
        match self {
            StepSchedule::Power { scale, offset, power, .. } => StepSchedule::Power { scale, offset, power, cap: Some(cap) },
            other => other,
        }
    }

    pub fn at(&self, k: usize) -> T {
        match self {
            StepSchedule::Power { scale, offset, power, cap } => {
                let g = *scale / (*offset + T::from_usize(k).unwrap()).powf(*power);
                cap.map_or(g, |c| g.min(c))
            }
            StepSchedule::Constant(g) => *g,
            StepSchedule::Custom(f) => f(k),
        }
    }
}

impl<T: Real> fmt::Debug for StepSchedule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Power { scale, offset, power, cap } => match cap {
                Some(c) => write!(f, "min({scale}/({offset}+k)^{power}, {c})"),
                None => write!(f, "{scale}/({offset}+k)^{power}"),
            },
            StepSchedule::Constant(g) => write!(f, "{g}"),
            StepSchedule::Custom(_) => f.write_str("custom"),
        }
    }
}

/// Samples per iteration `Nₖ`.
#[derive(Clone)]
pub enum SampleSchedule {
    Constant(usize),
    Custom(Arc<dyn Fn(usize) -> usize + Send + Sync>),
}

impl SampleSchedule {
    pub fn at(&self, k: usize) -> usize {
        match self {
            SampleSchedule::Constant(n) => *n,
            SampleSchedule::Custom(f) => f(k),
        }
    }
}

impl fmt::Debug for SampleSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSchedule::Constant(n) => write!(f, "{n}"),
            SampleSchedule::Custom(_) => f.write_str("custom"),
        }
    }
}

/// Penalty weight `cᵏ` of the subspace-constrained algorithm.
#[derive(Clone)]
pub enum PenaltySchedule<T> {
    Constant(T),
    /// `min(1/γᵏ, cap)`
    InverseStepCapped {
        cap: T,
    },
    Custom(Custom<T>),
}

impl<T: Real> PenaltySchedule<T> {
    pub fn at(&self, k: usize, gamma: T) -> T {
        match self {
            PenaltySchedule::Constant(c) => *c,
            PenaltySchedule::InverseStepCapped { cap } => gamma.recip().min(*cap),
            PenaltySchedule::Custom(f) => f(k),
        }
    }
}

impl<T: Real> fmt::Debug for PenaltySchedule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltySchedule::Constant(c) => write!(f, "{c}"),
            PenaltySchedule::InverseStepCapped { cap } => write!(f, "min(1/gamma, {cap})"),
            PenaltySchedule::Custom(_) => f.write_str("custom"),
        }
    }
}

/// Scaling `ρᵏ` of the dual step `ρᵏγᵏ`.
#[derive(Clone)]
pub enum DualScale<T> {
    Constant(T),
    /// `before` for `k < at`, `after` from then on.
    Switch {
        before: T,
        after: T,
        at: usize,
    },
    Custom(Custom<T>),
}

impl<T: Real> DualScale<T> {
    pub fn at(&self, k: usize) -> T {
        match self {
            DualScale::Constant(r) => *r,
            DualScale::Switch { before, after, at } => {
                if k < *at {
                    *before
                } else {
                    *after
                }
            }
            DualScale::Custom(f) => f(k),
        }
    }
}

impl<T: Real> fmt::Debug for DualScale<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualScale::Constant(r) => write!(f, "{r}"),
            DualScale::Switch { before, after, at } => write!(f, "{before} for k < {at}, then {after}"),
            DualScale::Custom(_) => f.write_str("custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleCheck {
    Valid,
    Invalid(String),
    /// Opaque schedule: only partial sums over the horizon are known.
    Warning(String),
}

/// Checks `Σγᵏ = ∞` and `Σ(γᵏ)² < ∞`.
///
/// The power family `a/(b + k)^p` (a cap changes finitely many terms) is
/// decided exactly: valid iff `p ∈ (1/2, 1]`. Other schedules only get
/// partial-sum diagnostics, since finitely many terms decide nothing.
pub fn validate_step_schedule<T: Real>(schedule: &StepSchedule<T>, horizon: usize) -> Result<ScheduleCheck> {
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for k in 0..=horizon {
        let g = schedule.at(k);
        if !(g > T::zero() && g.is_finite()) {
            return Err(Error::InvalidSchedule(format!("step {g} at k = {k} is not positive")));
        }
        let g = g.as_f64();
        sum += g;
        sum_sq += g * g;
    }
    Ok(match schedule {
        StepSchedule::Power { power, .. } => {
            let p = power.as_f64();
            if p <= 0.5 {
                ScheduleCheck::Invalid(format!("power {p} <= 1/2: sum of squared steps diverges"))
            } else if p > 1.0 {
                ScheduleCheck::Invalid(format!("power {p} > 1: sum of steps is finite"))
            } else {
                ScheduleCheck::Valid
            }
        }
        StepSchedule::Constant(_) => ScheduleCheck::Invalid("constant step: sum of squared steps diverges".into()),
        StepSchedule::Custom(_) => ScheduleCheck::Warning(format!(
            "custom schedule cannot be certified; over k = 0..={horizon}: sum = {sum:.6e}, sum of squares = {sum_sq:.6e}"
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_family() {
        let s = StepSchedule::harmonic(100.0, 1.0);
        assert_eq!(s.at(0), 1.0);
        assert_eq!(s.at(100), 0.5);
        assert_eq!(validate_step_schedule(&s, 1000).unwrap(), ScheduleCheck::Valid);
        let s = StepSchedule::harmonic(100.0, 1.0).with_cap(0.5);
        assert_eq!(s.at(0), 0.5);
        assert_eq!(s.at(300), 0.25);
        let sq = StepSchedule::Power { scale: 1.0, offset: 1.0, power: 2.0, cap: None };
        assert!(matches!(validate_step_schedule(&sq, 100).unwrap(), ScheduleCheck::Invalid(_)));
        let root = StepSchedule::Power { scale: 1.0, offset: 1.0, power: 0.5, cap: None };
        assert!(matches!(validate_step_schedule(&root, 100).unwrap(), ScheduleCheck::Invalid(_)));
        assert!(matches!(validate_step_schedule(&StepSchedule::Constant(0.1), 10).unwrap(), ScheduleCheck::Invalid(_)));
    }

    #[test]
    fn custom_and_nonpositive() {
        let s: StepSchedule<f64> = StepSchedule::Custom(Arc::new(|k| 1.0 / (k as f64 + 1.0)));
        let ScheduleCheck::Warning(text) = validate_step_schedule(&s, 9).unwrap() else { panic!() };
        assert!(text.contains("sum"));
        let bad: StepSchedule<f64> = StepSchedule::Custom(Arc::new(|k| 1.0 - k as f64));
        assert!(matches!(validate_step_schedule(&bad, 5), Err(Error::InvalidSchedule(_))));
    }

    #[test]
    fn penalty_and_dual() {
        let c = PenaltySchedule::InverseStepCapped { cap: 200.0 };
        assert_eq!(c.at(0, 1.0), 1.0);
        assert_eq!(c.at(0, 0.001), 200.0);
        let r = DualScale::Switch { before: 2.0, after: 0.5, at: 1000 };
        assert_eq!(r.at(999), 2.0);
        assert_eq!(r.at(1000), 0.5);
    }
}
