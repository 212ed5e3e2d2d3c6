//! Conditional Value-at-Risk of the upper tail.
//!
//! `CVaR_α[Z] = inf_η { η + α⁻¹ E[Z − η]⁺ }` with `α ∈ (0, 1]`: small `α`
//! averages the worst costs only, `α = 1` is the mean. The empirical version
//! replaces the expectation by the sample average and is minimized exactly at
//! an order statistic.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Risk level `α ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RiskLevel<T>(T);

impl<T: Real> RiskLevel<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if alpha > T::zero() && alpha <= T::one() {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidLevel(alpha.to_f64().unwrap_or(f64::NAN)))
        }
    }

    #[inline]
    pub fn alpha(self) -> T {
        self.0
    }
}

/// `N` events × `n` components of sampled costs, row-major. Row `j` holds the
/// costs of every component under the same event.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch<T> {
    events: usize,
    components: usize,
    values: Vec<T>,
}

impl<T: Real> SampleBatch<T> {
    pub fn new(events: usize, components: usize, values: Vec<T>) -> Result<Self> {
        if events == 0 || components == 0 {
            return Err(Error::EmptyBatch);
        }
        if values.len() != events * components {
            return Err(Error::DimensionMismatch(format!(
                "batch of {events}x{components} needs {} values, got {}",
                events * components,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample);
        }
        Ok(Self { events, components, values })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let events = rows.len();
        let components = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != components) {
            return Err(Error::DimensionMismatch("ragged sample rows".into()));
        }
        Self::new(events, components, rows.concat())
    }

    #[inline]
    pub fn events(&self) -> usize {
        self.events
    }

    #[inline]
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.components..(j + 1) * self.components]
    }

    pub fn column(&self, i: usize) -> Vec<T> {
        (0..self.events).map(|j| self.values[j * self.components + i]).collect()
    }
}

/// Empirical CVaR of a scalar sample.
pub fn empirical_cvar<T: Real>(samples: &[T], level: RiskLevel<T>) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut buf = Vec::with_capacity(samples.len());
    for s in samples {
        if !s.is_finite() {
            return Err(Error::InvalidSample);
        }
        buf.push(s.as_f64());
    }
    Ok(T::lit(cvar_of_buffer(&mut buf, level.alpha().as_f64())))
}

/// Component-wise empirical CVaR of a batch whose rows share events.
pub fn empirical_cvar_vector<T: Real>(batch: &SampleBatch<T>, level: RiskLevel<T>) -> Result<Vec<T>> {
    let alpha = level.alpha().as_f64();
    let mut buf = vec![0.0f64; batch.events];
    let mut out = Vec::with_capacity(batch.components);
    for i in 0..batch.components {
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = batch.values[j * batch.components + i].as_f64();
        }
        out.push(T::lit(cvar_of_buffer(&mut buf, alpha)));
    }
    Ok(out)
}

/// Minimizes `η + (Nα)⁻¹ Σ [z_j − η]⁺` over the order statistics. The buffer
/// is permuted in place. Inputs must be finite and nonempty.
fn cvar_of_buffer(z: &mut [f64], alpha: f64) -> f64 {
    let n = z.len();
    let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if n == 1 || lo == hi {
        return lo;
    }
    let tail_mass = n as f64 * alpha;
    // The objective's slope changes sign at the order statistic with
    // ⌈Nα⌉ samples at or above it.
    let tail = (tail_mass.ceil() as usize).clamp(1, n);
    let pivot = n - tail;
    z.select_nth_unstable_by(pivot, f64::total_cmp);
    let mut candidates = [z[pivot], f64::NAN, f64::NAN];
    if pivot > 0 {
        candidates[1] = z[..pivot].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    if pivot + 1 < n {
        candidates[2] = z[pivot + 1..].iter().copied().fold(f64::INFINITY, f64::min);
    }
    let objective = |eta: f64| {
        let excess: f64 = z.iter().map(|&v| (v - eta).max(0.0)).sum();
        eta + excess / tail_mass
    };
    let best = candidates.iter().filter(|c| c.is_finite()).map(|&c| objective(c)).fold(f64::INFINITY, f64::min);
    best.clamp(lo, hi)
}

/// Closed-form CVaR of `U(lo, hi)`: `hi − α(hi − lo)/2`.
pub fn exact_cvar_uniform<T: Real>(lo: T, hi: T, level: RiskLevel<T>) -> Result<T> {
    if !(lo <= hi) {
        return Err(Error::DegenerateInterval);
    }
    Ok(hi - level.alpha() * (hi - lo) / T::lit(2.0))
}

/// Largest number of non-degenerate terms handled by
/// [`exact_cvar_uniform_sum`].
pub const MAX_UNIFORM_TERMS: usize = 24;

/// Exact CVaR of a sum of independent uniforms `Σ_i U(lo_i, hi_i)`.
///
/// The density of a sum of scaled uniforms is a box spline, so the CDF and its
/// integral are finite alternating sums over subsets of the widths. Both are
/// evaluated only in the lower corner of the support (the upper tail is
/// mapped there by the reflection `U ↦ 1 − U`), where few subsets contribute.
/// Terms narrower than `1e-9` of the widest one are replaced by their mean,
/// which moves the result by at most half their width.
pub fn exact_cvar_uniform_sum<T: Real>(intervals: &[(T, T)], level: RiskLevel<T>) -> Result<T> {
    let mut base = 0.0f64;
    let mut widths = Vec::with_capacity(intervals.len());
    for &(lo, hi) in intervals {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidSample);
        }
        if lo > hi {
            return Err(Error::DegenerateInterval);
        }
        base += lo.as_f64();
        widths.push((hi - lo).as_f64());
    }
    let widest = widths.iter().copied().fold(0.0f64, f64::max);
    if widest == 0.0 {
        return Ok(T::lit(base));
    }
    let mut b = Vec::with_capacity(widths.len());
    for w in widths {
        if w > 1e-9 * widest {
            b.push(w / widest);
        } else {
            base += w / 2.0;
        }
    }
    if b.len() > MAX_UNIFORM_TERMS {
        return Err(Error::Unsupported(format!("exact CVaR of {} uniform terms (limit {MAX_UNIFORM_TERMS})", b.len())));
    }
    b.sort_by(f64::total_cmp);
    let alpha = level.alpha().as_f64();
    Ok(T::lit(base + widest * unit_uniform_sum_cvar(&b, alpha)))
}

/// CVaR of `Σ b_i V_i`, `V_i ~ U(0,1)`, for sorted positive `b`.
fn unit_uniform_sum_cvar(b: &[f64], alpha: f64) -> f64 {
    let k = b.len();
    let total: f64 = b.iter().sum();
    let beta = alpha.min(1.0 - alpha).max(0.0);
    // k!·Πb accumulated as Π (j·b_j) to stay in range
    let norm: f64 = b.iter().enumerate().map(|(j, &bj)| (j + 1) as f64 * bj).product();
    let (q, integral) = if beta == 0.0 {
        (0.0, 0.0)
    } else {
        let q0 = (beta * norm).powf(1.0 / k as f64);
        if q0 <= b[0] {
            (q0, q0 * beta / (k + 1) as f64)
        } else {
            let (mut lo, mut hi) = (b[0].min(q0), total / 2.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if corner_sum(b, mid, k) / norm < beta {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * total {
                    break;
                }
            }
            let q = 0.5 * (lo + hi);
            (q, corner_sum(b, q, k + 1) / (norm * (k + 1) as f64))
        }
    };
    if alpha <= 0.5 {
        total - q + integral / alpha
    } else {
        (total / 2.0 - (1.0 - alpha) * q + integral) / alpha
    }
}

/// `Σ_{S : b_S < z} (−1)^{|S|} (z − b_S)^p` over subsets of sorted `b`.
fn corner_sum(b: &[f64], z: f64, p: usize) -> f64 {
    fn walk(b: &[f64], from: usize, partial: f64, sign: f64, z: f64, p: i32, acc: &mut f64) {
        *acc += sign * (z - partial).powi(p);
        for i in from..b.len() {
            let next = partial + b[i];
            if next >= z {
                // sorted ascending, later elements only grow the sum
                break;
            }
            walk(b, i + 1, next, -sign, z, p, acc);
        }
    }
    let mut acc = 0.0;
    if z > 0.0 {
        walk(b, 0, 0.0, 1.0, z, p as i32, &mut acc);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lvl(a: f64) -> RiskLevel<f64> {
        RiskLevel::new(a).unwrap()
    }

    /// Independent oracle: dense grid minimization of the defining objective.
    fn grid_cvar(z: &[f64], alpha: f64) -> f64 {
        let lo = z.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
        let hi = z.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let steps = 200_000;
        (0..=steps)
            .map(|s| {
                let eta = lo + (hi - lo) * s as f64 / steps as f64;
                eta + z.iter().map(|v| (v - eta).max(0.0)).sum::<f64>() / (z.len() as f64 * alpha)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn risk_level_bounds() {
        assert!(RiskLevel::new(0.0).is_err());
        assert!(RiskLevel::new(1.0 + 1e-12).is_err());
        assert!(RiskLevel::new(f64::NAN).is_err());
        assert!(RiskLevel::new(1.0).is_ok());
        assert!(RiskLevel::new(1e-9).is_ok());
    }

    #[test]
    fn worked_examples() {
        let z = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(grid_cvar(&z, 0.5), 3.5, epsilon = 1e-4);
        assert_abs_diff_eq!(empirical_cvar(&z, lvl(0.5)).unwrap(), 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(empirical_cvar(&z, lvl(1.0)).unwrap(), 2.5, epsilon = 1e-12);
        assert_eq!(empirical_cvar(&[7.0], lvl(0.3)).unwrap(), 7.0);
        assert_abs_diff_eq!(grid_cvar(&z, 0.05), 4.0, epsilon = 1e-4);
        assert_eq!(empirical_cvar(&z, lvl(0.05)).unwrap(), 4.0);
    }

    #[test]
    fn matches_grid_oracle_on_awkward_levels() {
        let z = [0.3, -1.2, 4.4, 4.4, 2.0, 0.0, 9.1, 3.3, 3.3];
        for alpha in [0.01, 0.1, 1.0 / 9.0, 0.2, 2.0 / 9.0, 0.37, 0.5, 0.9, 1.0] {
            let exact = empirical_cvar(&z, lvl(alpha)).unwrap();
            assert_abs_diff_eq!(exact, grid_cvar(&z, alpha), epsilon = 1e-3);
        }
    }

    #[test]
    fn error_paths() {
        assert_eq!(empirical_cvar::<f64>(&[], lvl(0.5)), Err(Error::EmptyBatch));
        assert_eq!(empirical_cvar(&[1.0, f64::NAN], lvl(0.5)), Err(Error::InvalidSample));
        assert_eq!(empirical_cvar(&[1.0, f64::INFINITY], lvl(0.5)), Err(Error::InvalidSample));
        assert_eq!(SampleBatch::<f64>::new(0, 2, vec![]), Err(Error::EmptyBatch));
        assert_eq!(SampleBatch::new(1, 2, vec![1.0, f64::NAN]), Err(Error::InvalidSample));
    }

    #[test]
    fn vector_examples() {
        let batch = SampleBatch::from_rows(&[vec![1.0, 10.0], vec![2.0, 20.0]]).unwrap();
        assert_eq!(empirical_cvar_vector(&batch, lvl(1.0)).unwrap(), vec![1.5, 15.0]);
        let half = empirical_cvar_vector(&batch, lvl(0.5)).unwrap();
        assert_abs_diff_eq!(half[0], grid_cvar(&[1.0, 2.0], 0.5), epsilon = 1e-4);
        assert_abs_diff_eq!(half[1], grid_cvar(&[10.0, 20.0], 0.5), epsilon = 1e-3);
        assert_eq!(half, vec![2.0, 20.0]);
        let single = SampleBatch::from_rows(&[vec![5.0, 5.0]]).unwrap();
        assert_eq!(empirical_cvar_vector(&single, lvl(0.3)).unwrap(), vec![5.0, 5.0]);
    }

    #[test]
    fn uniform_closed_form() {
        assert_abs_diff_eq!(exact_cvar_uniform(0.0, 0.5, lvl(0.05)).unwrap(), 0.4875, epsilon = 1e-15);
        assert_abs_diff_eq!(exact_cvar_uniform(0.0, 1.0, lvl(1.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(exact_cvar_uniform(2.0, 2.0, lvl(0.3)).unwrap(), 2.0);
        assert_eq!(exact_cvar_uniform(1.0, 0.0, lvl(0.3)), Err(Error::DegenerateInterval));
    }

    #[test]
    fn uniform_sum_single_term_matches_closed_form() {
        for alpha in [0.01, 0.05, 0.3, 0.5, 0.7, 1.0] {
            let got = exact_cvar_uniform_sum(&[(-1.0, 3.0)], lvl(alpha)).unwrap();
            let want = exact_cvar_uniform(-1.0, 3.0, lvl(alpha)).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_sum_triangular_tail() {
        // U1+U2 on [0,2]: P(Z > 2−t) = t²/2, tail mean 2 − 2t/3.
        for alpha in [0.05, 0.2, 0.5] {
            let t = (2.0f64 * alpha).sqrt();
            let got = exact_cvar_uniform_sum(&[(0.0, 1.0), (0.0, 1.0)], lvl(alpha)).unwrap();
            assert_abs_diff_eq!(got, 2.0 - 2.0 * t / 3.0, epsilon = 1e-10);
        }
        // α = 1 is the mean
        let got = exact_cvar_uniform_sum(&[(0.0, 1.0), (2.0, 4.0)], lvl(1.0)).unwrap();
        assert_abs_diff_eq!(got, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn uniform_sum_degenerate_terms() {
        assert_eq!(exact_cvar_uniform_sum::<f64>(&[], lvl(0.1)).unwrap(), 0.0);
        assert_eq!(exact_cvar_uniform_sum(&[(2.0, 2.0), (1.0, 1.0)], lvl(0.1)).unwrap(), 3.0);
        assert_eq!(exact_cvar_uniform_sum(&[(2.0, 1.0)], lvl(0.1)), Err(Error::DegenerateInterval));
        let tiny = exact_cvar_uniform_sum(&[(0.0, 1.0), (0.0, 1e-12)], lvl(0.05)).unwrap();
        assert_abs_diff_eq!(tiny, 0.975, epsilon = 1e-11);
    }

    #[test]
    fn f32_path_agrees_with_f64() {
        let z32: Vec<f32> = vec![1.0, 2.0, 3.0, 4.0];
        let got = empirical_cvar(&z32, RiskLevel::new(0.5f32).unwrap()).unwrap();
        assert_eq!(got, 3.5f32);
    }
}
