use std::sync::Arc;

use rand::Rng;

use crate::cvar::{exact_cvar_uniform, RiskLevel, SampleBatch};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::Matrix;
use crate::problems::StochasticViProblem;
use crate::rng::RngStream;
use crate::scalar::Real;

/// `C_i(h, ξ) = (Mh + c)_i + u_i` with independent `u_i ~ U(lo_i, hi_i)`.
///
/// The noise enters additively, so `F_i(h) = (Mh + c)_i + CVaR_α[u_i]` in
/// closed form.
pub fn build_separable_game<T: Real>(
    name: &str,
    m: Matrix<T>,
    c: Vec<T>,
    noise: Vec<Option<(T, T)>>,
    feasible: FeasibleSet<T>,
    level: RiskLevel<T>,
) -> Result<StochasticViProblem<T>> {
    let n = feasible.n();
    if m.rows() != n || m.cols() != n || c.len() != n || noise.len() != n {
        return Err(Error::DimensionMismatch(format!("separable game of dimension {n}")));
    }
    let mut shift = Vec::with_capacity(n);
    for (ci, u) in c.iter().zip(&noise) {
        let tail = match *u {
            Some((lo, hi)) => exact_cvar_uniform(lo, hi, level)?,
            None => T::zero(),
        };
        shift.push(*ci + tail);
    }
    let m = Arc::new(m);
    let sampler = {
        let m = Arc::clone(&m);
        move |h: &[T], count: usize, stream: &RngStream| {
            let mean: Vec<T> = m.mul_vec(h).iter().zip(&c).map(|(a, b)| *a + *b).collect();
            let mut values: Vec<T> = (0..count).flat_map(|_| mean.iter().copied()).collect();
            for (i, u) in noise.iter().enumerate() {
                if let Some((lo, hi)) = *u {
                    let mut rng = stream.component(i as u64);
                    for j in 0..count {
                        values[j * n + i] += lo + (hi - lo) * T::lit(rng.gen::<f64>());
                    }
                }
            }
            SampleBatch::new(count, n, values)
        }
    };
    let exact = move |h: &[T]| Ok(m.mul_vec(h).iter().zip(&shift).map(|(a, b)| *a + *b).collect());
    let start = crate::geometry::project_feasible(&vec![T::zero(); n], &feasible, T::lit(1e-12))?;
    Ok(StochasticViProblem {
        name: name.into(),
        sampler: Arc::new(sampler),
        exact_map: Some(Arc::new(exact)),
        exact_map_tolerance: T::zero(),
        feasible,
        level,
        od_groups: None,
        default_start: start,
        labels: vec![("kind".into(), "separable".into())],
    })
}

/// Two parallel routes with unit demand: `C₁ = 2h₁ + U(0, 0.5)`,
/// `C₂ = h₂ + 1`. The equilibrium solves `2h₁ + CVaR = 2 − h₁`.
pub fn toy1<T: Real>(level: RiskLevel<T>) -> Result<StochasticViProblem<T>> {
    let two = T::lit(2.0);
    let m = Matrix::from_rows(&[vec![two, T::zero()], vec![T::zero(), T::one()]], 2)?;
    let feasible = FeasibleSet::simplex_product(2, &[(vec![0, 1], T::one())])?;
    let mut p =
        build_separable_game("toy1", m, vec![T::zero(), T::one()], vec![Some((T::zero(), T::lit(0.5))), None], feasible, level)?;
    p.od_groups = Some(vec![vec![0, 1]]);
    p.default_start = vec![T::lit(0.5), T::lit(0.5)];
    p.labels.push(("paths".into(), "2".into()));
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvar::empirical_cvar_vector;
    use approx::assert_abs_diff_eq;

    #[test]
    fn toy1_exact_map() {
        let p = toy1(RiskLevel::new(0.05).unwrap()).unwrap();
        let f = p.exact(&[0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(f[0], 0.6 + 0.4875, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 1.7, epsilon = 1e-15);
        let f = p.exact(&[1.0, 0.0]).unwrap();
        assert_eq!(f, vec![2.4875, 1.0]);
    }

    #[test]
    fn toy1_samples() {
        let p = toy1(RiskLevel::new(0.05).unwrap()).unwrap();
        let b = p.sample(&[0.5, 0.5], 200, &RngStream::new(9, 1)).unwrap();
        for j in 0..200 {
            let r = b.row(j);
            assert!(r[0] >= 1.0 && r[0] <= 1.5);
            assert_eq!(r[1], 1.5);
        }
        // α = 1 gives the sample mean, close to E = 1.25
        let est = empirical_cvar_vector(&b, RiskLevel::new(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(est[0], 1.25, epsilon = 0.05);
    }

    #[test]
    fn dimension_checked() {
        let feasible = FeasibleSet::simplex_product(2, &[(vec![0, 1], 1.0)]).unwrap();
        let r =
            build_separable_game("bad", Matrix::identity(3), vec![0.0; 2], vec![None; 2], feasible, RiskLevel::new(0.5).unwrap());
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
