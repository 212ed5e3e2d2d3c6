use std::sync::Arc;

use rand::Rng;

use crate::cvar::{exact_cvar_uniform, RiskLevel, SampleBatch};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::{is_positive_definite, Matrix};
use crate::problems::StochasticViProblem;
use crate::rng::RngStream;
use crate::scalar::Real;

/// Game with scalar strategies `x_i ∈ [0, upper_i]` and costs
/// `θ_i(x) = CVaR_α[f_i(x) g(ξ) + f̄_i(x)]`.
///
/// `f_i` is affine with nonnegative coefficients, so only its own slope
/// `∂f_i/∂x_i` enters the map. The pseudo-gradient of `f̄` is `Qx + r`.
#[derive(Debug, Clone)]
pub struct NashGameSpec<T> {
    pub own_slope: Vec<T>,
    pub q: Matrix<T>,
    pub r: Vec<T>,
    /// `g(ξ) ~ U(lo, hi)`
    pub noise: (T, T),
    pub upper: Vec<T>,
}

pub fn build_nash_game<T: Real>(spec: &NashGameSpec<T>, level: RiskLevel<T>) -> Result<StochasticViProblem<T>> {
    let n = spec.own_slope.len();
    if n == 0 || spec.q.rows() != n || spec.q.cols() != n || spec.r.len() != n || spec.upper.len() != n {
        return Err(Error::DimensionMismatch(format!("Nash game with {n} players")));
    }
    if spec.own_slope.iter().any(|d| !(*d >= T::zero())) {
        return Err(Error::Precondition("f_i must be nondecreasing in x_i".into()));
    }
    let (lo, hi) = spec.noise;
    let g_cvar = exact_cvar_uniform(lo, hi, level)?;
    let sym = Matrix::from_fn(n, n, |i, j| (spec.q[(i, j)] + spec.q[(j, i)]) / T::lit(2.0));
    if !is_positive_definite(&sym) {
        return Err(Error::NotStrictlyMonotone);
    }
    let feasible = FeasibleSet::boxed(Matrix::zeros(0, n), Vec::new(), vec![T::zero(); n], spec.upper.clone())?;

    let q = Arc::new(spec.q.clone());
    let r = Arc::new(spec.r.clone());
    let d = Arc::new(spec.own_slope.clone());
    let sampler = {
        let (q, r, d) = (Arc::clone(&q), Arc::clone(&r), Arc::clone(&d));
        move |x: &[T], count: usize, stream: &RngStream| {
            let det: Vec<T> = q.mul_vec(x).iter().zip(r.iter()).map(|(a, b)| *a + *b).collect();
            let mut rng = stream.component(0);
            let mut values = Vec::with_capacity(count * n);
            for _ in 0..count {
                let g = lo + (hi - lo) * T::lit(rng.gen::<f64>());
                values.extend(det.iter().zip(d.iter()).map(|(a, di)| *di * g + *a));
            }
            SampleBatch::new(count, n, values)
        }
    };
    let exact =
        move |x: &[T]| Ok(q.mul_vec(x).iter().zip(r.iter()).zip(d.iter()).map(|((a, b), di)| *di * g_cvar + *a + *b).collect());
    let start = spec.upper.iter().map(|u| *u / T::lit(2.0)).collect();
    Ok(StochasticViProblem {
        name: "nash".into(),
        sampler: Arc::new(sampler),
        exact_map: Some(Arc::new(exact)),
        exact_map_tolerance: T::zero(),
        feasible,
        level,
        od_groups: None,
        default_start: start,
        labels: vec![("kind".into(), "nash".into()), ("players".into(), n.to_string())],
    })
}
