//! Small dense linear algebra: row-major matrices, vector helpers, a
//! rank-revealing Gram–Schmidt basis, least squares and nonnegative least
//! squares. Dimensions in this crate stay in the low hundreds, so nothing here
//! tries to be cache-clever.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row vectors. `cols` is needed to describe a
    /// matrix with zero rows.
    pub fn from_rows(rows: &[Vec<T>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · y`
    pub fn tr_mul_vec(&self, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != T::zero() {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

#[inline]
pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// `y += a·x`
#[inline]
pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y)).sqrt()
}

/// Orthonormal basis of the span of a list of vectors, built by modified
/// Gram–Schmidt with one reorthogonalization pass.
///
/// A vector whose residual norm falls below `rel_tol` times its original
/// norm is treated as dependent and dropped. For every input vector the
/// coefficients against the basis are kept, so `v_j = Σ_i coeffs[j][i]·u_i`
/// holds for kept vectors exactly and for dropped ones up to the tolerance.
#[derive(Debug, Clone)]
pub struct OrthoBasis<T> {
    dim: usize,
    basis: Vec<Vec<T>>,
    coeffs: Vec<Vec<T>>,
    pivot: Vec<Option<usize>>,
}

impl<T: Real> OrthoBasis<T> {
    pub fn build(vectors: &[Vec<T>], dim: usize, rel_tol: T) -> Self {
        let mut basis: Vec<Vec<T>> = Vec::new();
        let mut coeffs = Vec::with_capacity(vectors.len());
        let mut pivot = Vec::with_capacity(vectors.len());
        for v in vectors {
            debug_assert_eq!(v.len(), dim);
            let orig = norm2(v);
            let mut r = vec![T::zero(); basis.len()];
            let mut w = v.clone();
            for _ in 0..2 {
                for (i, u) in basis.iter().enumerate() {
                    let c = dot(u, &w);
                    r[i] += c;
                    axpy(-c, u, &mut w);
                }
            }
            let res = norm2(&w);
            if orig > T::zero() && res > rel_tol * orig {
                for x in w.iter_mut() {
                    *x /= res;
                }
                pivot.push(Some(basis.len()));
                r.push(res);
                basis.push(w);
            } else {
                pivot.push(None);
            }
            coeffs.push(r);
        }
        Self { dim, basis, coeffs, pivot }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.basis
    }

    /// Basis index for input vector `j`, `None` when it was dropped.
    pub fn pivot(&self, j: usize) -> Option<usize> {
        self.pivot[j]
    }

    /// Coefficient of input vector `j` along basis vector `i`.
    pub fn coeff(&self, j: usize, i: usize) -> T {
        self.coeffs[j].get(i).copied().unwrap_or_else(T::zero)
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for u in &self.basis {
            axpy(dot(u, x), u, &mut out);
        }
        out
    }

    /// Coordinates `y` with `Σ_j y_j v_j` equal to the projection of `x`
    /// onto the span. Dropped vectors get coefficient zero; the kept
    /// coefficients are unique.
    pub fn combination(&self, x: &[T]) -> Vec<T> {
        let c: Vec<T> = self.basis.iter().map(|u| dot(u, x)).collect();
        let mut kept = vec![usize::MAX; self.rank()];
        for (j, p) in self.pivot.iter().enumerate() {
            if let Some(m) = p {
                kept[*m] = j;
            }
        }
        let mut y = vec![T::zero(); self.pivot.len()];
        for i in (0..self.rank()).rev() {
            let mut acc = c[i];
            for &j in &kept[i + 1..self.rank()] {
                acc -= y[j] * self.coeff(j, i);
            }
            let j = kept[i];
            y[j] = acc / self.coeff(j, i);
        }
        y
    }
}

/// Least-squares solution of `Σ_j x_j·cols[j] ≈ y`. Columns found dependent
/// at relative tolerance `1e-12` receive coefficient zero.
pub fn lstsq<T: Real>(cols: &[Vec<T>], y: &[T]) -> Vec<T> {
    if cols.is_empty() {
        return Vec::new();
    }
    OrthoBasis::build(cols, y.len(), T::lit(1e-12)).combination(y)
}

/// Lawson–Hanson nonnegative least squares: minimizes `‖Σ_j x_j·cols[j] − y‖`
/// over `x ≥ 0`.
pub fn nnls<T: Real>(cols: &[Vec<T>], y: &[T]) -> Vec<T> {
    let p = cols.len();
    let mut x = vec![T::zero(); p];
    if p == 0 {
        return x;
    }
    let scale = cols.iter().map(|c| norm2(c)).fold(T::zero(), T::max).max(T::one()) * norm2(y).max(T::one());
    let tol = T::lit(1e-12) * scale;
    let mut passive = vec![false; p];
    let residual = |x: &[T]| -> Vec<T> {
        let mut r = y.to_vec();
        for (j, c) in cols.iter().enumerate() {
            if x[j] != T::zero() {
                axpy(-x[j], c, &mut r);
            }
        }
        r
    };
    for _outer in 0..3 * p + 10 {
        let r = residual(&x);
        let w: Vec<T> = cols.iter().map(|c| dot(c, &r)).collect();
        let next = (0..p)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = next else { break };
        passive[j] = true;
        for _inner in 0..3 * p + 10 {
            let idx: Vec<usize> = (0..p).filter(|&k| passive[k]).collect();
            let sub_cols: Vec<Vec<T>> = idx.iter().map(|&k| cols[k].clone()).collect();
            let z_sub = lstsq(&sub_cols, y);
            let mut z = vec![T::zero(); p];
            for (pos, &k) in idx.iter().enumerate() {
                z[k] = z_sub[pos];
            }
            if idx.iter().all(|&k| z[k] > T::zero()) {
                x = z;
                break;
            }
            let mut step = T::one();
            for &k in &idx {
                if z[k] <= T::zero() {
                    let denom = x[k] - z[k];
                    if denom > T::zero() {
                        step = step.min(x[k] / denom);
                    } else {
                        step = T::zero();
                    }
                }
            }
            for k in 0..p {
                x[k] = x[k] + step * (z[k] - x[k]);
                if passive[k] && x[k] <= T::lit(1e-15) * scale {
                    x[k] = T::zero();
                    passive[k] = false;
                }
            }
        }
    }
    x
}

/// Cholesky factorization attempt; `true` iff the symmetric matrix is
/// numerically positive definite.
pub fn is_positive_definite<T: Real>(m: &Matrix<T>) -> bool {
    let n = m.rows();
    if n != m.cols() {
        return false;
    }
    let mut l = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    true
}
