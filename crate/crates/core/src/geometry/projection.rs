use crate::error::{Error, Result};
use crate::geometry::set::{Constraint, FeasibleSet, Structure};
use crate::linalg::{dot, norm2};
use crate::scalar::Real;

/// Sweep budget for Dykstra over the inequality pieces.
pub const INEQ_SWEEPS: usize = 10_000;
/// Sweep budget for Dykstra between the affine set and the inequality block.
pub const FEASIBLE_SWEEPS: usize = 100_000;
const INEQ_TOL: f64 = 1e-9;

/// Projection of `v` onto `{x ≥ 0, Σx = demand}` by sort and threshold.
/// A zero demand maps the whole group to zero.
pub fn project_simplex<T: Real>(v: &[T], demand: T) -> Vec<T> {
    if v.is_empty() {
        return Vec::new();
    }
    if demand <= T::zero() {
        return vec![T::zero(); v.len()];
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - demand) / T::from_usize(j + 1).unwrap();
        if u - t > T::zero() {
            theta = t;
        } else {
            break;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

/// Euclidean projection onto `H_ineq = {h : qⁱ(h) ≤ 0}`.
pub fn project_ineq<T: Real>(h: &[T], set: &FeasibleSet<T>) -> Result<Vec<T>> {
    check_dim(h, set)?;
    match set.structure() {
        Structure::NonnegOrthant => Ok(h.iter().map(|&x| x.max(T::zero())).collect()),
        Structure::Box { lo, hi } => Ok(h.iter().zip(lo.iter().zip(hi)).map(|(&x, (&l, &u))| x.max(l).min(u)).collect()),
        Structure::General => {
            let pieces: Vec<_> = set.constraints().iter().map(|q| move |x: &[T]| Ok(project_sublevel(q.as_ref(), x))).collect();
            let refs: Vec<Projection<T>> = pieces.iter().map(|p| p as Projection<T>).collect();
            if refs.is_empty() {
                return Ok(h.to_vec());
            }
            dykstra(h, &refs, T::lit(INEQ_TOL), INEQ_SWEEPS)
        }
    }
}

/// Euclidean projection onto `H = H_aff ∩ H_ineq` within `tol`.
///
/// Products of scaled simplexes are projected exactly group by group;
/// everything else goes through Dykstra's alternating projections.
pub fn project_feasible<T: Real>(h: &[T], set: &FeasibleSet<T>, tol: T) -> Result<Vec<T>> {
    check_dim(h, set)?;
    if let Some(sp) = set.simplex_groups() {
        let mut out = h.to_vec();
        for (idx, d) in &sp.groups {
            let part: Vec<T> = idx.iter().map(|&i| h[i]).collect();
            for (&i, v) in idx.iter().zip(project_simplex(&part, *d)) {
                out[i] = v;
            }
        }
        for &i in &sp.free {
            out[i] = out[i].max(T::zero());
        }
        return Ok(out);
    }
    project_feasible_dykstra(h, set, tol)
}

/// The general path of [`project_feasible`], exposed so the exact simplex
/// path can be checked against it.
pub fn project_feasible_dykstra<T: Real>(h: &[T], set: &FeasibleSet<T>, tol: T) -> Result<Vec<T>> {
    check_dim(h, set)?;
    let affine = |x: &[T]| Ok(set.affine().project(x));
    if set.a().rows() == 0 {
        return project_ineq(h, set);
    }
    if set.constraints().is_empty() {
        return Ok(set.affine().project(h));
    }
    match set.structure() {
        Structure::General => {
            let pieces: Vec<_> = set.constraints().iter().map(|q| move |x: &[T]| Ok(project_sublevel(q.as_ref(), x))).collect();
            let mut refs: Vec<Projection<T>> = vec![&affine];
            refs.extend(pieces.iter().map(|p| p as Projection<T>));
            dykstra(h, &refs, tol, FEASIBLE_SWEEPS)
        }
        _ => {
            let ineq = |x: &[T]| project_ineq(x, set);
            dykstra(h, &[&affine, &ineq], tol, FEASIBLE_SWEEPS)
        }
    }
}

/// Projection operator of one closed convex set.
pub type Projection<'a, T> = &'a dyn Fn(&[T]) -> Result<Vec<T>>;

/// Dykstra's alternating projection onto the intersection of closed convex
/// sets given by their projection operators.
pub fn dykstra<T: Real>(start: &[T], projections: &[Projection<T>], tol: T, max_sweeps: usize) -> Result<Vec<T>> {
    let n = start.len();
    let m = projections.len();
    let mut x = start.to_vec();
    let mut incr = vec![vec![T::zero(); n]; m];
    let stop = tol * T::lit(0.1);
    for _ in 0..max_sweeps {
        let mut change = T::zero();
        for (proj, p) in projections.iter().zip(incr.iter_mut()) {
            let shifted: Vec<T> = x.iter().zip(p.iter()).map(|(a, b)| *a + *b).collect();
            let y = proj(&shifted)?;
            for i in 0..n {
                let new_p = shifted[i] - y[i];
                let dp = new_p - p[i];
                let dx = y[i] - x[i];
                change += dp * dp + dx * dx;
                p[i] = new_p;
                x[i] = y[i];
            }
        }
        if !change.is_finite() {
            return Err(Error::ProjectionTolerance);
        }
        if change.sqrt() <= stop {
            return Ok(x);
        }
    }
    Err(Error::ProjectionTolerance)
}

/// Projection onto `{q ≤ 0}`: exact for affine `q`, otherwise repeated
/// one-dimensional Newton steps along the gradient onto the boundary.
pub fn project_sublevel<T: Real>(q: &dyn Constraint<T>, x: &[T]) -> Vec<T> {
    let mut y = x.to_vec();
    let scale = T::one() + norm2(x);
    for _ in 0..100 {
        let v = q.value(&y);
        if v <= T::lit(1e-14) * scale {
            break;
        }
        let g = q.gradient(&y);
        let gg = dot(&g, &g);
        if !(gg > T::zero()) {
            break;
        }
        let step = v / gg;
        for (yi, gi) in y.iter_mut().zip(&g) {
            *yi -= step * *gi;
        }
        if q.is_affine() {
            break;
        }
    }
    y
}

fn check_dim<T: Real>(h: &[T], set: &FeasibleSet<T>) -> Result<()> {
    if h.len() != set.n() {
        return Err(Error::DimensionMismatch(format!("point has {} entries, set has dimension {}", h.len(), set.n())));
    }
    Ok(())
}
