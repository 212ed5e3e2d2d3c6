use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, sub};
use crate::problems::StochasticViProblem;
use crate::scalar::Real;

/// Outcome of a CVaR-based Wardrop equilibrium check.
#[derive(Debug, Clone, PartialEq)]
pub struct CweReport<T> {
    pub pass: bool,
    /// Largest `costs_p − costs_p'` over used paths `p` and alternatives `p'`
    /// of the same OD pair; zero when no used path is beaten.
    pub max_violation: T,
    /// `(group, p, p')` attaining `max_violation`.
    pub witness: Option<(usize, usize, usize)>,
}

/// Checks that every path carrying more than `tol` flow is no costlier than
/// any alternative in its group, up to `tol`.
pub fn check_cwe<T: Real>(h: &[T], costs: &[T], od_groups: &[Vec<usize>], tol: T) -> Result<CweReport<T>> {
    if h.len() != costs.len() {
        return Err(Error::DimensionMismatch("h and costs differ in length".into()));
    }
    let mut worst = T::zero();
    let mut witness = None;
    for (w, group) in od_groups.iter().enumerate() {
        if let Some(&bad) = group.iter().find(|&&p| p >= h.len()) {
            return Err(Error::DimensionMismatch(format!("group {w} references path {bad} of {}", h.len())));
        }
        for &p in group.iter().filter(|&&p| h[p] > tol) {
            for &alt in group {
                let excess = costs[p] - costs[alt];
                if excess > worst {
                    worst = excess;
                    witness = Some((w, p, alt));
                }
            }
        }
    }
    Ok(CweReport { pass: worst <= tol, max_violation: worst, witness })
}

/// Smallest `(F(x) − F(y))ᵀ(x − y)` seen over random pairs. A negative value
/// disproves monotonicity on the box; a nonnegative one is evidence, not proof.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<T> {
    pub min_inner: T,
    /// `min_inner / ‖x − y‖²` at the minimizing pair.
    pub ratio_at_min: T,
    pub argmin: Option<(Vec<T>, Vec<T>)>,
    pub pairs: usize,
    /// Pairs with `x = y`, skipped.
    pub degenerate: usize,
    pub note: &'static str,
}

pub const PROBE_NOTE: &str = "evidence, not proof";

/// Draws `pair_count` pairs uniformly from the box `[lo, hi]`.
pub fn monotonicity_probe<T: Real, R: Rng>(
    problem: &StochasticViProblem<T>,
    lo: &[T],
    hi: &[T],
    pair_count: usize,
    rng: &mut R,
) -> Result<MonotonicityReport<T>> {
    if lo.len() != problem.n() || hi.len() != problem.n() {
        return Err(Error::DimensionMismatch("probe box has the wrong dimension".into()));
    }
    let mut draw = || -> Vec<T> { lo.iter().zip(hi).map(|(&l, &u)| l + (u - l) * T::lit(rng.gen::<f64>())).collect() };
    let pairs: Vec<(Vec<T>, Vec<T>)> = (0..pair_count).map(|_| (draw(), draw())).collect();
    monotonicity_probe_pairs(problem, &pairs)
}

/// The probe over caller-supplied pairs.
pub fn monotonicity_probe_pairs<T: Real>(
    problem: &StochasticViProblem<T>,
    pairs: &[(Vec<T>, Vec<T>)],
) -> Result<MonotonicityReport<T>> {
    let mut report = MonotonicityReport {
        min_inner: T::zero(),
        ratio_at_min: T::zero(),
        argmin: None,
        pairs: pairs.len(),
        degenerate: 0,
        note: PROBE_NOTE,
    };
    for (x, y) in pairs {
        let d = sub(x, y);
        let dd = dot(&d, &d);
        if dd == T::zero() {
            report.degenerate += 1;
            continue;
        }
        let inner = dot(&sub(&problem.exact(x)?, &problem.exact(y)?), &d);
        if report.argmin.is_none() || inner < report.min_inner {
            report.min_inner = inner;
            report.ratio_at_min = inner / dd;
            report.argmin = Some((x.clone(), y.clone()));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvar::RiskLevel;
    use crate::problems::toy1;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn cwe_examples() {
        let h1 = 1.5125 / 3.0;
        let c = 2.0 - h1;
        let r = check_cwe(&[h1, 1.0 - h1], &[c, c], &[vec![0, 1]], 1e-9).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_violation, 0.0);
        let r = check_cwe(&[1.0, 0.0], &[2.4875, 1.0], &[vec![0, 1]], 1e-9).unwrap();
        assert!(!r.pass);
        assert_abs_diff_eq!(r.max_violation, 1.4875, epsilon = 1e-15);
        assert_eq!(r.witness, Some((0, 0, 1)));
        let r = check_cwe(&[1.0, 3.0], &[5.0, 1.0], &[vec![0], vec![1]], 1e-9).unwrap();
        assert!(r.pass);
        assert!(check_cwe(&[1.0], &[1.0], &[vec![0, 4]], 1e-9).is_err());
    }

    #[test]
    fn toy1_probe() {
        let p = toy1(RiskLevel::new(0.05).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = monotonicity_probe(&p, &[0.0, 0.0], &[1.0, 1.0], 1000, &mut rng).unwrap();
        assert!(r.min_inner >= 0.0);
        assert!(r.ratio_at_min >= 1.0 - 1e-9);
        assert_eq!(r.note, "evidence, not proof");
    }

    #[test]
    fn degenerate_pairs_skipped() {
        let p = toy1(RiskLevel::new(0.05).unwrap()).unwrap();
        let pairs = vec![(vec![0.3, 0.3], vec![0.3, 0.3]), (vec![0.0, 1.0], vec![1.0, 0.0])];
        let r = monotonicity_probe_pairs(&p, &pairs).unwrap();
        assert_eq!(r.degenerate, 1);
        assert!(r.min_inner > 0.0);
    }

    #[test]
    fn anti_monotone_map_flagged() {
        let mut p = toy1(RiskLevel::new(0.05).unwrap()).unwrap();
        p.exact_map = Some(Arc::new(|h: &[f64]| Ok(h.iter().map(|v| -v).collect())));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = monotonicity_probe(&p, &[0.0, 0.0], &[1.0, 1.0], 20, &mut rng).unwrap();
        assert!(r.min_inner < 0.0);
    }
}
