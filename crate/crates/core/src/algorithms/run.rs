use std::time::Instant;

use crate::algorithms::config::{AlgorithmConfig, OracleMode};
use crate::algorithms::trace::{Algorithm, RunTrace, TerminalStatus, TraceRecord};
use crate::error::{Error, Result};
use crate::geometry::{dykstra, project_feasible, project_ineq, FEASIBLE_SWEEPS};
use crate::linalg::{dist, norm2};
use crate::problems::StochasticViProblem;
use crate::rng::RngStream;
use crate::scalar::Real;

const DIVERGENCE_NORM: f64 = 1e8;
const AFFINE_START_TOL: f64 = 1e-8;

/// `[x]_y⁺`: `x` if `y > 0`, else `max(x, 0)`.
pub fn gated_plus<T: Real>(x: T, y: T) -> T {
    if y > T::zero() {
        x
    } else {
        x.max(T::zero())
    }
}

pub fn gated_plus_vec<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| gated_plus(a, b)).collect()
}

/// `hᵏ⁺¹ = Π_H(hᵏ − γᵏ F̂(hᵏ))`
pub fn run_projected<T: Real>(problem: &StochasticViProblem<T>, config: &AlgorithmConfig<T>, h0: &[T]) -> Result<RunTrace<T>> {
    let mut run = Driver::new(problem, config, Algorithm::Projected, h0)?;
    let set = &problem.feasible;
    let scale = T::one() + h0.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if !set.contains(h0, config.projection_tol * scale) {
        return Err(Error::Precondition("h0 must lie in the feasible set".into()));
    }
    let mut h = h0.to_vec();
    run.start(&h, None)?;
    for k in 0..config.max_iter {
        let gamma = config.step.at(k);
        let step = run.oracle(&h, k).map(|(f, n)| {
            let y: Vec<T> = h.iter().zip(&f).map(|(a, b)| *a - gamma * *b).collect();
            (y, n)
        });
        let next = step.and_then(|(y, n)| {
            run.trace.projection_calls += 1;
            project_feasible(&y, set, config.projection_tol).map(|p| (p, n))
        });
        match next {
            Ok((p, _)) => h = p,
            Err(e) => return Ok(run.fail(e)),
        }
        if !run.advance(k, &h, None, gamma)? {
            break;
        }
    }
    Ok(run.finish())
}

/// `hᵏ⁺¹ = hᵏ − γᵏ L (F̂(hᵏ) + cᵏ (hᵏ − Π_{H_ineq}(hᵏ)))`
pub fn run_subspace<T: Real>(problem: &StochasticViProblem<T>, config: &AlgorithmConfig<T>, h0: &[T]) -> Result<RunTrace<T>> {
    let mut run = Driver::new(problem, config, Algorithm::Subspace, h0)?;
    run.require_affine_start(h0)?;
    let l = problem.feasible.projector();
    let mut h = h0.to_vec();
    run.start(&h, None)?;
    for k in 0..config.max_iter {
        let gamma = config.step.at(k);
        let c = config.penalty.at(k, gamma);
        let dir = run.oracle(&h, k).and_then(|(mut f, _)| {
            if c > T::zero() {
                let p = project_ineq(&h, &problem.feasible)?;
                for i in 0..f.len() {
                    f[i] += c * (h[i] - p[i]);
                }
            }
            Ok(l.apply(&f))
        });
        match dir {
            Ok(d) => {
                for (hi, di) in h.iter_mut().zip(&d) {
                    *hi -= gamma * *di;
                }
            }
            Err(e) => return Ok(run.fail(e)),
        }
        if let Err(e) = run.safeguard(&mut h) {
            return Ok(run.fail(e));
        }
        if !run.advance(k, &h, None, gamma)? {
            break;
        }
    }
    Ok(run.finish())
}

/// `hᵏ⁺¹ = hᵏ − γᵏ L (F̂(hᵏ) + Dq(hᵏ)ᵀλᵏ)`, `λᵏ⁺¹ = [λᵏ + ρᵏγᵏ q(hᵏ)]⁺`
pub fn run_multiplier<T: Real>(
    problem: &StochasticViProblem<T>,
    config: &AlgorithmConfig<T>,
    h0: &[T],
    lambda0: &[T],
) -> Result<RunTrace<T>> {
    let mut run = Driver::new(problem, config, Algorithm::Multiplier, h0)?;
    run.require_affine_start(h0)?;
    let set = &problem.feasible;
    if lambda0.len() != set.constraints().len() {
        return Err(Error::DimensionMismatch(format!(
            "lambda0 has {} entries, the set has {} inequalities",
            lambda0.len(),
            set.constraints().len()
        )));
    }
    if lambda0.iter().any(|l| !(*l >= T::zero())) {
        return Err(Error::Precondition("lambda0 must be nonnegative".into()));
    }
    if !set.all_affine() && !config.allow_nonaffine {
        return Err(Error::AffineRequired);
    }
    let l = set.projector();
    let mut h = h0.to_vec();
    let mut lambda = lambda0.to_vec();
    run.start(&h, Some(&lambda))?;
    for k in 0..config.max_iter {
        let gamma = config.step.at(k);
        let dual_step = config.dual_scale.at(k) * gamma;
        let dir = run.oracle(&h, k).map(|(f, _)| {
            let dq = set.jacobian_tr_mul(&h, &lambda);
            let g: Vec<T> = f.iter().zip(&dq).map(|(a, b)| *a + *b).collect();
            l.apply(&g)
        });
        let d = match dir {
            Ok(d) => d,
            Err(e) => return Ok(run.fail(e)),
        };
        let q = set.q_values(&h);
        for (li, qi) in lambda.iter_mut().zip(&q) {
            let mut v = (*li + dual_step * *qi).max(T::zero());
            if let Some(cap) = config.multiplier_cap {
                v = v.min(cap);
            }
            *li = v;
        }
        for (hi, di) in h.iter_mut().zip(&d) {
            *hi -= gamma * *di;
        }
        if let Err(e) = run.safeguard(&mut h) {
            return Ok(run.fail(e));
        }
        if !run.advance(k, &h, Some(&lambda), gamma)? {
            break;
        }
    }
    Ok(run.finish())
}

struct Driver<'a, T: Real> {
    problem: &'a StochasticViProblem<T>,
    config: &'a AlgorithmConfig<T>,
    trace: RunTrace<T>,
    stride: usize,
    clock: Instant,
    last_samples: usize,
}

impl<'a, T: Real> Driver<'a, T> {
    fn new(problem: &'a StochasticViProblem<T>, config: &'a AlgorithmConfig<T>, algorithm: Algorithm, h0: &[T]) -> Result<Self> {
        config.validate()?;
        if h0.len() != problem.n() {
            return Err(Error::DimensionMismatch(format!("h0 has {} entries, problem has {}", h0.len(), problem.n())));
        }
        if config.oracle == OracleMode::Exact && !problem.has_exact_map() {
            return Err(Error::MissingExactMap);
        }
        if let Some(f) = &config.reference_map {
            if f.len() != problem.n() {
                return Err(Error::DimensionMismatch("reference map has the wrong length".into()));
            }
        }
        if let Some((lo, hi)) = &config.safeguard_box {
            if lo.len() != problem.n() {
                return Err(Error::DimensionMismatch("safeguard box has the wrong dimension".into()));
            }
            if let Some((set_lo, set_hi)) = problem.feasible.bounding_box() {
                let covers = lo.iter().zip(&set_lo).all(|(a, b)| a <= b) && hi.iter().zip(&set_hi).all(|(a, b)| a >= b);
                if !covers {
                    return Err(Error::Precondition("safeguard box must contain the feasible set".into()));
                }
            }
        }
        Ok(Self {
            problem,
            config,
            trace: RunTrace {
                algorithm,
                records: Vec::new(),
                status: TerminalStatus::Completed,
                iterations: 0,
                clamp_events: 0,
                projection_calls: 0,
            },
            stride: config.stride(),
            clock: Instant::now(),
            last_samples: 0,
        })
    }

    fn require_affine_start(&self, h0: &[T]) -> Result<()> {
        let b = self.problem.feasible.b();
        let scale = T::one().max(b.iter().fold(T::zero(), |m, v| m.max(v.abs())));
        if self.problem.feasible.eq_residual(h0) > T::lit(AFFINE_START_TOL) * scale {
            return Err(Error::Precondition("h0 must satisfy Ah = b".into()));
        }
        Ok(())
    }

    fn oracle(&mut self, h: &[T], k: usize) -> Result<(Vec<T>, usize)> {
        let out = match self.config.oracle {
            OracleMode::Exact => (self.problem.exact(h)?, 0),
            OracleMode::Sampled => {
                let n = self.config.samples.at(k);
                (self.problem.estimate(h, n, &RngStream::new(self.config.seed, k as u64))?, n)
            }
        };
        self.last_samples = out.1;
        Ok(out)
    }

    /// Keeps `h` in the safeguard box by projecting onto the box intersected
    /// with `{Ah = b}`.
    fn safeguard(&mut self, h: &mut Vec<T>) -> Result<()> {
        let Some((lo, hi)) = &self.config.safeguard_box else {
            return Ok(());
        };
        if h.iter().zip(lo.iter().zip(hi)).all(|(x, (l, u))| x >= l && x <= u) {
            return Ok(());
        }
        self.trace.clamp_events += 1;
        let clamp = |x: &[T]| Ok(x.iter().zip(lo.iter().zip(hi)).map(|(&v, (&l, &u))| v.max(l).min(u)).collect());
        let set = &self.problem.feasible;
        *h = if set.a().rows() == 0 {
            clamp(h)?
        } else {
            let affine = |x: &[T]| Ok(set.affine().project(x));
            dykstra(h, &[&clamp, &affine], self.config.projection_tol, FEASIBLE_SWEEPS)?
        };
        Ok(())
    }

    fn start(&mut self, h: &[T], lambda: Option<&[T]>) -> Result<()> {
        let gamma = self.config.step.at(0);
        let n = match self.config.oracle {
            OracleMode::Exact => 0,
            OracleMode::Sampled => self.config.samples.at(0),
        };
        self.push(0, h, lambda, gamma, n)
    }

    /// Records `hᵏ⁺¹` when due; returns false once the run has diverged.
    fn advance(&mut self, k: usize, h: &[T], lambda: Option<&[T]>, gamma: T) -> Result<bool> {
        self.trace.iterations = k + 1;
        let finite = h.iter().all(|v| v.is_finite()) && lambda.is_none_or(|l| l.iter().all(|v| v.is_finite()));
        if !finite || norm2(h) > T::lit(DIVERGENCE_NORM) {
            self.trace.status = TerminalStatus::Diverged { k: k + 1 };
            return Ok(false);
        }
        let next = k + 1;
        if next.is_multiple_of(self.stride) || next == self.config.max_iter {
            let (gamma, n) = if next < self.config.max_iter {
                let n = match self.config.oracle {
                    OracleMode::Exact => 0,
                    OracleMode::Sampled => self.config.samples.at(next),
                };
                (self.config.step.at(next), n)
            } else {
                (gamma, self.last_samples)
            };
            self.push(next, h, lambda, gamma, n)?;
        }
        Ok(self.trace.status == TerminalStatus::Completed)
    }

    fn push(&mut self, k: usize, h: &[T], lambda: Option<&[T]>, gamma: T, samples: usize) -> Result<()> {
        let map_error = match &self.config.reference_map {
            Some(f_star) => match self.problem.exact(h) {
                Ok(f) => Some(dist(&f, f_star)),
                Err(e) => {
                    self.trace.status = TerminalStatus::Error(e.to_string());
                    None
                }
            },
            None => None,
        };
        self.trace.records.push(TraceRecord {
            k,
            h: h.to_vec(),
            lambda: lambda.map(<[T]>::to_vec),
            gamma,
            samples,
            map_error,
            wall_clock: self.clock.elapsed(),
        });
        Ok(())
    }

    fn fail(mut self, e: Error) -> RunTrace<T> {
        self.trace.status = TerminalStatus::Error(e.to_string());
        self.trace
    }

    fn finish(self) -> RunTrace<T> {
        self.trace
    }
}
