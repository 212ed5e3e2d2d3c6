use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::projection::project_feasible;
use crate::geometry::subspace::{AffineSubspace, SubspaceProjector};
use crate::linalg::{axpy, dot, Matrix};
use crate::scalar::Real;

/// Default Euclidean tolerance for projections.
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-9;

/// Smooth convex inequality `q(h) ≤ 0`.
pub trait Constraint<T: Real>: Send + Sync {
    fn value(&self, h: &[T]) -> T;
    fn gradient(&self, h: &[T]) -> Vec<T>;
    fn is_affine(&self) -> bool {
        false
    }
}

/// `normalᵀh − offset ≤ 0`
#[derive(Debug, Clone)]
pub struct Halfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Real> Constraint<T> for Halfspace<T> {
    fn value(&self, h: &[T]) -> T {
        dot(&self.normal, h) - self.offset
    }

    fn gradient(&self, _h: &[T]) -> Vec<T> {
        self.normal.clone()
    }

    fn is_affine(&self) -> bool {
        true
    }
}

/// Shape of the inequality block, used to pick exact projections.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure<T> {
    /// `qⁱ(h) = −hᵢ` for every coordinate.
    NonnegOrthant,
    /// `lo ≤ h ≤ hi`; constraints ordered as all lower bounds, then all upper.
    Box {
        lo: Vec<T>,
        hi: Vec<T>,
    },
    General,
}

/// Disjoint groups `{h_G ≥ 0, Σ_G h = d}` plus coordinates that are only
/// sign-constrained. Detected from the equality rows of an orthant set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexProduct<T> {
    pub groups: Vec<(Vec<usize>, T)>,
    pub free: Vec<usize>,
}

/// `H = {h : Ah = b, qⁱ(h) ≤ 0}`.
#[derive(Clone)]
pub struct FeasibleSet<T: Real> {
    n: usize,
    a: Matrix<T>,
    b: Vec<T>,
    ineq: Vec<Arc<dyn Constraint<T>>>,
    structure: Structure<T>,
    affine: AffineSubspace<T>,
    simplex: Option<SimplexProduct<T>>,
}

impl<T: Real> fmt::Debug for FeasibleSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeasibleSet")
            .field("n", &self.n)
            .field("equalities", &self.a.rows())
            .field("inequalities", &self.ineq.len())
            .field("structure", &self.structure)
            .field("simplex_product", &self.simplex.is_some())
            .finish()
    }
}

impl<T: Real> FeasibleSet<T> {
    pub fn nonneg_orthant(a: Matrix<T>, b: Vec<T>) -> Result<Self> {
        let n = a.cols();
        let ineq = (0..n)
            .map(|i| {
                let mut normal = vec![T::zero(); n];
                normal[i] = -T::one();
                Arc::new(Halfspace { normal, offset: T::zero() }) as Arc<dyn Constraint<T>>
            })
            .collect();
        Self::assemble(a, b, ineq, Structure::NonnegOrthant)
    }

    pub fn boxed(a: Matrix<T>, b: Vec<T>, lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        let n = a.cols();
        if lo.len() != n || hi.len() != n {
            return Err(Error::DimensionMismatch(format!("box bounds must have {n} entries")));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::EmptyFeasibleSet("box with lo > hi".into()));
        }
        let mut ineq: Vec<Arc<dyn Constraint<T>>> = Vec::with_capacity(2 * n);
        for (i, &l) in lo.iter().enumerate() {
            let mut normal = vec![T::zero(); n];
            normal[i] = -T::one();
            ineq.push(Arc::new(Halfspace { normal, offset: -l }));
        }
        for (i, &u) in hi.iter().enumerate() {
            let mut normal = vec![T::zero(); n];
            normal[i] = T::one();
            ineq.push(Arc::new(Halfspace { normal, offset: u }));
        }
        Self::assemble(a, b, ineq, Structure::Box { lo, hi })
    }

    pub fn general(a: Matrix<T>, b: Vec<T>, ineq: Vec<Arc<dyn Constraint<T>>>) -> Result<Self> {
        Self::assemble(a, b, ineq, Structure::General)
    }

    /// Product of scaled simplexes: each group sums to its demand, every
    /// coordinate is nonnegative.
    pub fn simplex_product(n: usize, groups: &[(Vec<usize>, T)]) -> Result<Self> {
        let mut rows = Vec::with_capacity(groups.len());
        let mut b = Vec::with_capacity(groups.len());
        for (idx, d) in groups {
            let mut row = vec![T::zero(); n];
            for &i in idx {
                if i >= n {
                    return Err(Error::DimensionMismatch(format!("group index {i} out of range {n}")));
                }
                row[i] = T::one();
            }
            rows.push(row);
            b.push(*d);
        }
        Self::nonneg_orthant(Matrix::from_rows(&rows, n)?, b)
    }

    fn assemble(a: Matrix<T>, b: Vec<T>, ineq: Vec<Arc<dyn Constraint<T>>>, structure: Structure<T>) -> Result<Self> {
        let n = a.cols();
        if n == 0 {
            return Err(Error::DimensionMismatch("dimension must be positive".into()));
        }
        let affine = AffineSubspace::new(&a, &b)?;
        let simplex = match structure {
            Structure::NonnegOrthant => detect_simplex_product(&a, &b),
            _ => None,
        };
        let set = Self { n, a, b, ineq, structure, affine, simplex };
        set.check_nonempty()?;
        Ok(set)
    }

    fn check_nonempty(&self) -> Result<()> {
        let origin = vec![T::zero(); self.n];
        let p = project_feasible(&origin, self, T::lit(DEFAULT_PROJECTION_TOL))
            .map_err(|e| Error::EmptyFeasibleSet(format!("no feasible point found ({e})")))?;
        let scale = T::one() + self.b.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = T::lit(1e-6) * scale;
        if self.eq_residual(&p) > tol || self.ineq_violation(&p) > tol {
            return Err(Error::EmptyFeasibleSet("projection of the origin is infeasible".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn constraints(&self) -> &[Arc<dyn Constraint<T>>] {
        &self.ineq
    }

    pub fn structure(&self) -> &Structure<T> {
        &self.structure
    }

    pub fn affine(&self) -> &AffineSubspace<T> {
        &self.affine
    }

    pub fn simplex_groups(&self) -> Option<&SimplexProduct<T>> {
        self.simplex.as_ref()
    }

    pub fn projector(&self) -> SubspaceProjector<T> {
        self.affine.projector()
    }

    pub fn all_affine(&self) -> bool {
        self.ineq.iter().all(|q| q.is_affine())
    }

    pub fn q_values(&self, h: &[T]) -> Vec<T> {
        match &self.structure {
            Structure::NonnegOrthant => h.iter().map(|&x| -x).collect(),
            Structure::Box { lo, hi } => {
                lo.iter().zip(h).map(|(&l, &x)| l - x).chain(hi.iter().zip(h).map(|(&u, &x)| x - u)).collect()
            }
            Structure::General => self.ineq.iter().map(|q| q.value(h)).collect(),
        }
    }

    /// `Dq(h)ᵀλ`
    pub fn jacobian_tr_mul(&self, h: &[T], lambda: &[T]) -> Vec<T> {
        match &self.structure {
            Structure::NonnegOrthant => lambda.iter().map(|&l| -l).collect(),
            Structure::Box { .. } => (0..self.n).map(|i| lambda[self.n + i] - lambda[i]).collect(),
            Structure::General => {
                let mut out = vec![T::zero(); self.n];
                for (q, &l) in self.ineq.iter().zip(lambda) {
                    if l != T::zero() {
                        axpy(l, &q.gradient(h), &mut out);
                    }
                }
                out
            }
        }
    }

    /// `‖Ah − b‖∞`
    pub fn eq_residual(&self, h: &[T]) -> T {
        self.a.mul_vec(h).iter().zip(&self.b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
    }

    /// `maxᵢ [qⁱ(h)]⁺`
    pub fn ineq_violation(&self, h: &[T]) -> T {
        self.q_values(h).into_iter().fold(T::zero(), T::max)
    }

    pub fn contains(&self, h: &[T], tol: T) -> bool {
        h.len() == self.n && self.eq_residual(h) <= tol && self.ineq_violation(h) <= tol
    }

    /// Axis-aligned box containing the set, when the structure makes it
    /// obvious.
    pub fn bounding_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        match &self.structure {
            Structure::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            Structure::NonnegOrthant => {
                let sp = self.simplex.as_ref()?;
                if !sp.free.is_empty() {
                    return None;
                }
                let mut hi = vec![T::zero(); self.n];
                for (idx, d) in &sp.groups {
                    for &i in idx {
                        hi[i] = *d;
                    }
                }
                Some((vec![T::zero(); self.n], hi))
            }
            Structure::General => None,
        }
    }
}

fn detect_simplex_product<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<SimplexProduct<T>> {
    let n = a.cols();
    let mut owner = vec![false; n];
    let mut groups = Vec::with_capacity(a.rows());
    for (r, &d) in b.iter().enumerate() {
        if d < T::zero() {
            return None;
        }
        let mut idx = Vec::new();
        for (i, &v) in a.row(r).iter().enumerate() {
            if v == T::one() {
                if owner[i] {
                    return None;
                }
                owner[i] = true;
                idx.push(i);
            } else if v != T::zero() {
                return None;
            }
        }
        if idx.is_empty() {
            return None;
        }
        groups.push((idx, d));
    }
    let free = (0..n).filter(|&i| !owner[i]).collect();
    Some(SimplexProduct { groups, free })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_routing_structure() {
        let set = FeasibleSet::<f64>::simplex_product(5, &[(vec![0, 1], 1.0), (vec![3, 4], 2.0)]).unwrap();
        let sp = set.simplex_groups().unwrap();
        assert_eq!(sp.groups.len(), 2);
        assert_eq!(sp.free, vec![2]);
        assert!(set.bounding_box().is_none());
        let set = FeasibleSet::<f64>::simplex_product(2, &[(vec![0, 1], 1.0)]).unwrap();
        assert_eq!(set.bounding_box().unwrap().1, vec![1.0, 1.0]);
    }

    #[test]
    fn non_unit_rows_are_not_simplex() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0]], 2).unwrap();
        let set = FeasibleSet::nonneg_orthant(a, vec![1.0]).unwrap();
        assert!(set.simplex_groups().is_none());
    }

    #[test]
    fn empty_sets_rejected() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0]], 2).unwrap();
        assert!(matches!(FeasibleSet::nonneg_orthant(a, vec![-1.0]), Err(Error::EmptyFeasibleSet(_))));
        let a = Matrix::<f64>::zeros(0, 2);
        assert!(FeasibleSet::boxed(a, vec![], vec![0.0, 1.0], vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn constraint_values_and_jacobian() {
        let set = FeasibleSet::boxed(Matrix::<f64>::zeros(0, 2), vec![], vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        let h = [3.0, 0.0];
        assert_eq!(set.q_values(&h), vec![-3.0, -1.0, 1.0, -1.0]);
        assert_eq!(set.ineq_violation(&h), 1.0);
        assert_eq!(set.jacobian_tr_mul(&h, &[1.0, 0.0, 0.5, 2.0]), vec![-0.5, 2.0]);
        // the generic path through the stored halfspaces agrees
        let mut g = vec![0.0; 2];
        for (q, l) in set.constraints().iter().zip([1.0, 0.0, 0.5, 2.0]) {
            axpy(l, &q.gradient(&h), &mut g);
            assert!(q.is_affine());
        }
        assert_eq!(g, vec![-0.5, 2.0]);
    }
}
