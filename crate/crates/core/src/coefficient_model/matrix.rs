//! Small dense matrices (`d ≤ 3` rows) and symmetric eigen-decompositions.

use std::ops::{Index, IndexMut};

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::diagonal(&vec![T::one(); d])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LabError::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LabError::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = T::zero();
                for k in 0..self.cols {
                    s = s + self[(i, k)] * other[(k, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// `self · selfᵀ`.
    pub fn gram(&self) -> Self {
        self.matmul(&self.transpose())
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |s, (&a, &b)| s + a * b)
            })
            .collect()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-T::one()))
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> Self {
        self.add(&self.transpose()).scaled(T::lit(0.5))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// `ξᵀ A ξ`.
    pub fn quadratic_form(&self, xi: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s = s + self[(i, j)] * xi[i] * xi[j];
            }
        }
        s
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest Euclidean norm of a row.
    pub fn max_row_norm(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|&v| v * v).sum::<T>().sqrt())
            .fold(T::zero(), T::max)
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

fn symmetry_tol<T: Real>(m: &Matrix<T>) -> T {
    T::lit(1e-12) * T::one().max(m.max_abs())
}

/// Cyclic Jacobi rotations; exact enough for the `d ≤ 3` matrices used here.
pub fn symmetric_eigen<T: Real>(m: &Matrix<T>) -> Result<SymmetricEigen<T>> {
    if !m.is_symmetric(symmetry_tol(m)) {
        return Err(LabError::InvalidParameter("matrix is not symmetric".into()));
    }
    let d = m.rows();
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(d);
    let scale = T::one().max(a.max_abs());
    for _sweep in 0..64 {
        let off: T = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= T::epsilon() * T::lit(1e-2) * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .partial_cmp(&a[(j, j)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..d {
            vectors[(k, col)] = v[(k, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Smallest eigenvalue of a symmetric matrix (unclamped).
pub fn smallest_eigenvalue<T: Real>(m: &Matrix<T>) -> Result<T> {
    if m.rows() == 0 {
        return Err(LabError::Shape("empty matrix".into()));
    }
    Ok(symmetric_eigen(m)?.values[0])
}

/// Tolerance below zero that is still treated as rounding noise.
pub fn psd_tolerance<T: Real>(m: &Matrix<T>) -> T {
    T::lit(1e-12) * T::one().max(m.max_abs())
}

/// Floors eigenvalues in `[-tol, 0)` to zero; larger negative values are an
/// error. PSD input is returned unchanged.
pub fn psd_projection<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = symmetric_eigen(m)?;
    let tol = psd_tolerance(m);
    if eig.values[0] >= T::zero() {
        return Ok(m.clone());
    }
    if eig.values[0] < -tol {
        return Err(LabError::Assumption(format!(
            "matrix has eigenvalue {} below -{tol}",
            eig.values[0]
        )));
    }
    Ok(recompose(&eig, |l| l.max(T::zero())))
}

fn recompose<T: Real>(eig: &SymmetricEigen<T>, f: impl Fn(T) -> T) -> Matrix<T> {
    let d = eig.values.len();
    let mut out = Matrix::zeros(d, d);
    for (c, &l) in eig.values.iter().enumerate() {
        let fl = f(l);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = out[(i, j)] + eig.vectors[(i, c)] * fl * eig.vectors[(j, c)];
            }
        }
    }
    out
}

/// Symmetric PSD square root `S` with `S S = 2A`.
pub fn symmetric_sqrt<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = symmetric_eigen(a)?;
    let tol = psd_tolerance(a);
    if eig.values[0] < -tol {
        return Err(LabError::Assumption(format!(
            "cannot take the square root of a matrix with eigenvalue {}",
            eig.values[0]
        )));
    }
    let two = T::lit(2.0);
    Ok(recompose(&eig, |l| (two * l.max(T::zero())).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn random_psd(rng: &mut impl Rng, d: usize, rank: usize) -> Matrix<f64> {
        let b = Matrix::from_row_major(
            d,
            rank,
            (0..d * rank).map(|_| rng.sample(StandardNormal)).collect(),
        )
        .unwrap();
        b.gram()
    }

    #[test]
    fn eigen_examples() {
        let m = Matrix::<f64>::diagonal(&[2.0, 3.0]);
        assert_eq!(smallest_eigenvalue(&m).unwrap(), 2.0);
        let ones = Matrix::<f64>::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(smallest_eigenvalue(&ones).unwrap().abs() < 1e-15);
        let asym = Matrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(smallest_eigenvalue(&asym).is_err());
    }

    #[test]
    fn rayleigh_quotient_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = random_psd(&mut rng, 3, 3);
        let delta = smallest_eigenvalue(&m).unwrap();
        for _ in 0..10_000 {
            let xi: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let n2: f64 = xi.iter().map(|v| v * v).sum();
            assert!(m.quadratic_form(&xi) / n2 >= delta - 1e-10);
        }
    }

    #[test]
    fn eigenvectors_reconstruct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for d in 1..=3 {
            let m = random_psd(&mut rng, d, d);
            let eig = symmetric_eigen(&m).unwrap();
            let back = recompose(&eig, |l| l);
            assert!(back.sub(&m).max_abs() < 1e-13);
        }
    }

    #[test]
    fn sqrt_examples() {
        let z = Matrix::<f64>::zeros(2, 2);
        assert_eq!(symmetric_sqrt(&z).unwrap().max_abs(), 0.0);
        let half = Matrix::identity(3).scaled(0.5);
        assert!(
            symmetric_sqrt(&half)
                .unwrap()
                .sub(&Matrix::identity(3))
                .max_abs()
                < 1e-15
        );
        let neg = Matrix::diagonal(&[1.0, -0.1]);
        assert!(symmetric_sqrt(&neg).is_err());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for rank in 0..=3 {
            let a = random_psd(&mut rng, 3, rank);
            let s = symmetric_sqrt(&a).unwrap();
            assert!(s.matmul(&s).sub(&a.scaled(2.0)).max_abs() < 1e-12);
            assert!(s.is_symmetric(1e-14));
        }
    }
}
