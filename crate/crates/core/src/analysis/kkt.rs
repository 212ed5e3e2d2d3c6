use crate::error::{Error, Result};
use crate::geometry::RANK_TOL;
use crate::linalg::{axpy, lstsq, nnls, norm2, OrthoBasis};
use crate::problems::StochasticViProblem;
use crate::scalar::Real;

/// Primal-dual triple `(h, λ, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktPoint<T> {
    pub h: Vec<T>,
    pub lambda: Vec<T>,
    pub mu: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual<T> {
    /// `‖F(h) + Dq(h)ᵀλ + Aᵀμ‖`
    pub stationarity: T,
    /// `‖Ah − b‖∞`
    pub primal_eq: T,
    /// `maxᵢ [qⁱ(h)]⁺`
    pub primal_ineq: T,
    /// `maxᵢ [−λᵢ]⁺`
    pub dual_feas: T,
    /// `|λᵀq(h)|`
    pub complementarity: T,
}

impl<T: Real> KktResidual<T> {
    pub fn max(&self) -> T {
        self.stationarity.max(self.primal_eq).max(self.primal_ineq).max(self.dual_feas).max(self.complementarity)
    }

    pub fn components(&self) -> [(&'static str, T); 5] {
        [
            ("stationarity", self.stationarity),
            ("primal_eq", self.primal_eq),
            ("primal_ineq", self.primal_ineq),
            ("dual_feas", self.dual_feas),
            ("complementarity", self.complementarity),
        ]
    }
}

pub fn kkt_residual<T: Real>(point: &KktPoint<T>, problem: &StochasticViProblem<T>) -> Result<KktResidual<T>> {
    let set = &problem.feasible;
    if point.lambda.len() != set.constraints().len() || point.mu.len() != set.a().rows() {
        return Err(Error::DimensionMismatch("multiplier lengths do not match the feasible set".into()));
    }
    let f = problem.exact(&point.h)?;
    let mut r = f;
    let dq = set.jacobian_tr_mul(&point.h, &point.lambda);
    axpy(T::one(), &dq, &mut r);
    axpy(T::one(), &set.a().tr_mul_vec(&point.mu), &mut r);
    let q = set.q_values(&point.h);
    let lq = point.lambda.iter().zip(&q).fold(T::zero(), |s, (l, qi)| s + *l * *qi);
    Ok(KktResidual {
        stationarity: norm2(&r),
        primal_eq: set.eq_residual(&point.h),
        // adding zero turns -0 into +0
        primal_ineq: set.ineq_violation(&point.h) + T::zero(),
        dual_feas: point.lambda.iter().fold(T::zero(), |m, l| m.max(-*l)) + T::zero(),
        complementarity: lq.abs(),
    })
}

/// Multipliers at `h` by least squares on the stationarity equation.
///
/// Constraints with `qⁱ(h) ≥ −active_tol` are active. `λ` on them solves a
/// nonnegative least-squares problem in the null space of `A` (`L` removes
/// the `Aᵀμ` term); `μ` then absorbs the rest by ordinary least squares.
pub fn recover_multipliers<T: Real>(problem: &StochasticViProblem<T>, h: &[T], active_tol: T) -> Result<KktPoint<T>> {
    let set = &problem.feasible;
    let f = problem.exact(h)?;
    let s = set.constraints().len();
    let active = active_set(problem, h, active_tol);
    let l = set.projector();
    let grads: Vec<Vec<T>> = active.iter().map(|&i| set.constraints()[i].gradient(h)).collect();
    let cols: Vec<Vec<T>> = grads.iter().map(|g| l.apply(g)).collect();
    let target: Vec<T> = l.apply(&f).into_iter().map(|v| -v).collect();
    let sol = nnls(&cols, &target);
    let mut lambda = vec![T::zero(); s];
    let mut rest = f;
    for ((&i, li), g) in active.iter().zip(sol).zip(&grads) {
        lambda[i] = li;
        axpy(li, g, &mut rest);
    }
    let rows = set.a().row_vecs();
    let neg: Vec<T> = rest.iter().map(|v| -*v).collect();
    let mu = if rows.is_empty() { Vec::new() } else { lstsq(&rows, &neg) };
    Ok(KktPoint { h: h.to_vec(), lambda, mu })
}

/// Indices `i` with `qⁱ(h) ≥ −tol`.
pub fn active_set<T: Real>(problem: &StochasticViProblem<T>, h: &[T], tol: T) -> Vec<usize> {
    problem.feasible.q_values(h).iter().enumerate().filter(|(_, q)| **q >= -tol).map(|(i, _)| i).collect()
}

/// Rank of the equality rows together with the active gradients, and the
/// number of those vectors. LICQ holds iff the two agree.
pub fn licq_rank<T: Real>(problem: &StochasticViProblem<T>, h: &[T], active_tol: T) -> (usize, usize) {
    let set = &problem.feasible;
    let mut vectors = set.a().row_vecs();
    for i in active_set(problem, h, active_tol) {
        vectors.push(set.constraints()[i].gradient(h));
    }
    let count = vectors.len();
    (OrthoBasis::build(&vectors, set.n(), T::lit(RANK_TOL)).rank(), count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvar::RiskLevel;
    use crate::problems::toy1;
    use approx::assert_abs_diff_eq;

    const H1: f64 = 1.5125 / 3.0;

    fn toy() -> StochasticViProblem<f64> {
        toy1(RiskLevel::new(0.05).unwrap()).unwrap()
    }

    #[test]
    fn toy1_equilibrium() {
        let p = toy();
        let h = vec![H1, 1.0 - H1];
        let point = KktPoint { h: h.clone(), lambda: vec![0.0, 0.0], mu: vec![-(2.0 - H1)] };
        let r = kkt_residual(&point, &p).unwrap();
        assert!(r.max() < 1e-12, "{r:?}");
        let rec = recover_multipliers(&p, &h, 1e-9).unwrap();
        assert_eq!(rec.lambda, vec![0.0, 0.0]);
        assert_abs_diff_eq!(rec.mu[0], -(2.0 - H1), epsilon = 1e-12);
        assert_eq!(licq_rank(&p, &h, 1e-9), (1, 1));
    }

    #[test]
    fn residual_components() {
        let p = toy();
        let point = KktPoint { h: vec![H1, 1.0 - H1], lambda: vec![-0.25, 0.0], mu: vec![-(2.0 - H1)] };
        let r = kkt_residual(&point, &p).unwrap();
        assert_eq!(r.dual_feas, 0.25);
        let point = KktPoint { h: vec![H1 + 0.01, 1.0 - H1], lambda: vec![0.0; 2], mu: vec![0.0] };
        assert_abs_diff_eq!(kkt_residual(&point, &p).unwrap().primal_eq, 0.01, epsilon = 1e-15);
    }

    #[test]
    fn corners_are_not_kkt_points() {
        // at either corner the unused route is the cheaper one, which no
        // λ ≥ 0 on its bound can balance
        let p = toy();
        for h in [[1.0, 0.0], [0.0, 1.0]] {
            let rec = recover_multipliers(&p, &h, 1e-9).unwrap();
            assert_eq!(rec.lambda, vec![0.0, 0.0]);
            assert!(kkt_residual(&rec, &p).unwrap().stationarity > 1.0);
        }
    }

    #[test]
    fn bound_multiplier_recovered() {
        // make route 2 expensive: h* = (1, 0) with λ₂ = F₂ − F₁
        let mut p = toy();
        p.exact_map = Some(std::sync::Arc::new(|h: &[f64]| Ok(vec![h[0], h[1] + 5.0])));
        let rec = recover_multipliers(&p, &[1.0, 0.0], 1e-9).unwrap();
        assert_abs_diff_eq!(rec.lambda[1], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rec.mu[0], -1.0, epsilon = 1e-12);
        assert!(kkt_residual(&rec, &p).unwrap().max() < 1e-12);
    }

    #[test]
    fn missing_map() {
        let mut p = toy();
        p.exact_map = None;
        let point = KktPoint { h: vec![0.5, 0.5], lambda: vec![0.0; 2], mu: vec![0.0] };
        assert_eq!(kkt_residual(&point, &p).unwrap_err(), Error::MissingExactMap);
    }
}
