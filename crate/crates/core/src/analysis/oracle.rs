use crate::error::{Error, Result};
use crate::geometry::project_feasible;
use crate::linalg::{dist, norm2, sub};
use crate::problems::StochasticViProblem;
use crate::scalar::Real;

/// Iteration cap of the extragradient oracle.
pub const ORACLE_MAX_ITER: usize = 1_000_000;
const ARMIJO: f64 = 0.9;

/// `‖h − Π_H(h − F(h))‖`, zero exactly at solutions of `VI(H, F)`.
pub fn natural_residual<T: Real>(problem: &StochasticViProblem<T>, h: &[T]) -> Result<T> {
    let f = problem.exact(h)?;
    let p = project_feasible(&sub(h, &f), &problem.feasible, T::lit(1e-12))?;
    Ok(dist(h, &p))
}

/// Deterministic reference solution by extragradient from the problem's
/// default start.
pub fn reference_solution<T: Real>(problem: &StochasticViProblem<T>, tol: T) -> Result<Vec<T>> {
    reference_solution_from(problem, &problem.default_start, tol, ORACLE_MAX_ITER)
}

/// Extragradient with a backtracked step `τ`: predict
/// `y = Π(h − τF(h))`, shrink `τ` until `τ‖F(h) − F(y)‖ ≤ 0.9‖h − y‖`,
/// correct `h ← Π(h − τF(y))`. Stops once the natural residual is at most
/// `tol`.
pub fn reference_solution_from<T: Real>(
    problem: &StochasticViProblem<T>,
    start: &[T],
    tol: T,
    max_iter: usize,
) -> Result<Vec<T>> {
    let set = &problem.feasible;
    let ptol = (tol * T::lit(1e-2)).min(T::lit(1e-10));
    let project = |x: &[T]| project_feasible(x, set, ptol);
    let step = |h: &[T], f: &[T], tau: T| -> Vec<T> { h.iter().zip(f).map(|(a, b)| *a - tau * *b).collect() };
    let mut h = project(start)?;
    let mut fh = problem.exact(&h)?;
    let mut tau = T::one();
    let armijo = T::lit(ARMIJO);
    for _ in 0..max_iter {
        let natural = project(&step(&h, &fh, T::one()))?;
        if dist(&h, &natural) <= tol {
            return Ok(h);
        }
        let (y, fy) = loop {
            let y = project(&step(&h, &fh, tau))?;
            let fy = problem.exact(&y)?;
            let move_len = dist(&h, &y);
            if move_len == T::zero() || tau * dist(&fh, &fy) <= armijo * move_len {
                break (y, fy);
            }
            tau *= T::lit(0.5);
            if tau < T::lit(1e-14) {
                return Err(Error::OracleNotConverged);
            }
        };
        let next = project(&step(&h, &fy, tau))?;
        if !(norm2(&next).is_finite()) {
            return Err(Error::OracleNotConverged);
        }
        // a move as long as y's without backtracking invites a longer step
        let grow = tau * dist(&fh, &fy) <= T::lit(0.5) * armijo * dist(&h, &y);
        h = next;
        fh = problem.exact(&h)?;
        if grow {
            tau *= T::lit(1.25);
        }
    }
    Err(Error::OracleNotConverged)
}

/// `‖F(h) − F(h*)‖`
pub fn error_metric<T: Real>(h: &[T], h_star: &[T], problem: &StochasticViProblem<T>) -> Result<T> {
    Ok(dist(&problem.exact(h)?, &problem.exact(h_star)?))
}
