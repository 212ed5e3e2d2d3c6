use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, Matrix, OrthoBasis};
use crate::scalar::Real;

/// Relative residual below which a row of `A` counts as dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Orthogonal projector `L = I − Σ uᵢuᵢᵀ` onto the null space of `A`, where
/// `{uᵢ}` is an orthonormal basis of the row span of `A`.
#[derive(Debug, Clone)]
pub struct SubspaceProjector<T> {
    matrix: Matrix<T>,
    rank: usize,
}

impl<T: Real> SubspaceProjector<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// Dimension of the row span of `A`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        self.matrix.mul_vec(v)
    }
}

/// Builds `L` by rank-revealing Gram–Schmidt over the rows of `a`.
pub fn build_subspace_projector<T: Real>(a: &Matrix<T>) -> Result<SubspaceProjector<T>> {
    if !a.is_finite() {
        return Err(Error::DimensionMismatch("non-finite entry in A".into()));
    }
    let basis = OrthoBasis::build(&a.row_vecs(), a.cols(), T::lit(RANK_TOL));
    Ok(projector_from_basis(&basis))
}

pub(crate) fn projector_from_basis<T: Real>(basis: &OrthoBasis<T>) -> SubspaceProjector<T> {
    let n = basis.dim();
    let mut l = Matrix::identity(n);
    for u in basis.vectors() {
        for i in 0..n {
            if u[i] == T::zero() {
                continue;
            }
            for j in 0..n {
                l[(i, j)] -= u[i] * u[j];
            }
        }
    }
    SubspaceProjector { matrix: l, rank: basis.rank() }
}

/// The affine set `{h : Ah = b}` in orthonormal coordinates: `uᵢᵀh = βᵢ`.
#[derive(Debug, Clone)]
pub struct AffineSubspace<T> {
    basis: OrthoBasis<T>,
    targets: Vec<T>,
}

impl<T: Real> AffineSubspace<T> {
    pub fn new(a: &Matrix<T>, b: &[T]) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch(format!("A has {} rows, b has {}", a.rows(), b.len())));
        }
        if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite equality data".into()));
        }
        let basis = OrthoBasis::build(&a.row_vecs(), a.cols(), T::lit(RANK_TOL));
        let mut targets = vec![T::zero(); basis.rank()];
        let b_norm = norm2(b);
        for (j, &bj) in b.iter().enumerate() {
            let mut rem = bj;
            let limit = basis.pivot(j).unwrap_or(basis.rank());
            for (i, t) in targets.iter().enumerate().take(limit) {
                rem -= basis.coeff(j, i) * *t;
            }
            match basis.pivot(j) {
                Some(m) => targets[m] = rem / basis.coeff(j, m),
                None => {
                    // dependent row: its right-hand side must already agree
                    if rem.abs() > T::lit(1e-6) * (T::one() + b_norm) {
                        return Err(Error::InfeasibleEqualities);
                    }
                }
            }
        }
        Ok(Self { basis, targets })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &OrthoBasis<T> {
        &self.basis
    }

    pub fn projector(&self) -> SubspaceProjector<T> {
        projector_from_basis(&self.basis)
    }

    /// Euclidean projection onto the affine set.
    pub fn project(&self, h: &[T]) -> Vec<T> {
        let mut out = h.to_vec();
        for (u, &beta) in self.basis.vectors().iter().zip(&self.targets) {
            let gap = dot(u, &out) - beta;
            axpy(-gap, u, &mut out);
        }
        out
    }
}

/// Euclidean projection onto `{h : Ah = b}`.
pub fn project_affine<T: Real>(h: &[T], a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    if h.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!("h has {} entries, A has {} columns", h.len(), a.cols())));
    }
    let out = AffineSubspace::new(a, b)?.project(h);
    let resid = a.mul_vec(&out).iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
    let scale = T::one() + b.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if resid > T::lit(1e-8) * scale {
        return Err(Error::InfeasibleEqualities);
    }
    Ok(out)
}
