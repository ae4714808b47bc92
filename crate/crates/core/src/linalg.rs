//! Small dense linear algebra kernel: row-major matrices, Cholesky
//! factorization, and the vector helpers the solvers are built on.
//!
//! Problem sizes in this crate stay below a few thousand unknowns, so plain
//! dense storage is sufficient and keeps everything dependency-free.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ x`.
    pub fn matvec_t(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows, "matvec_t dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + xi * a;
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Gram matrix `AᵀA` (symmetric positive semidefinite).
    pub fn gram(&self) -> Matrix<T> {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == T::zero() {
                    continue;
                }
                let gi = g.row_mut(i);
                for j in i..n {
                    gi[j] = gi[j] + ri * row[j];
                }
            }
        }
        // mirror the upper triangle
        for i in 0..n {
            for j in 0..i {
                g[(i, j)] = g[(j, i)];
            }
        }
        g
    }

    /// `self += c * other`, shapes must match.
    pub fn add_scaled(&mut self, c: T, other: &Matrix<T>) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + c * b;
        }
    }

    pub fn scale(&mut self, c: T) {
        for a in self.data.iter_mut() {
            *a = *a * c;
        }
    }

    pub fn max_abs_diff(&self, other: &Matrix<T>) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn is_identity(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        self.data.iter().enumerate().all(|(k, &v)| {
            let (i, j) = (k / self.cols, k % self.cols);
            v == if i == j { T::one() } else { T::zero() }
        })
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Cholesky factorization `A = L Lᵀ` of a symmetric positive definite
    /// matrix. Fails with the pivot index of the first null direction.
    pub fn cholesky(&self) -> Result<Cholesky<T>, usize> {
        assert_eq!(self.rows, self.cols, "cholesky needs a square matrix");
        let n = self.rows;
        let mut l = self.clone();
        for j in 0..n {
            let mut d = l[(j, j)];
            for k in 0..j {
                let v = l[(j, k)];
                d = d - v * v;
            }
            if d <= T::zero() || !d.is_finite() {
                return Err(j);
            }
            let dsq = d.sqrt();
            l[(j, j)] = dsq;
            for i in (j + 1)..n {
                let mut s = l[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / dsq;
            }
        }
        // zero out the strictly upper triangle
        for i in 0..n {
            for j in (i + 1)..n {
                l[(i, j)] = T::zero();
            }
        }
        Ok(Cholesky { l })
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

/// Lower-triangular Cholesky factor.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Solves `A x = b` via the two triangular systems.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        assert_eq!(b.len(), n, "cholesky solve dimension mismatch");
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            let row = self.l.row(i);
            for j in 0..i {
                s = s - row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s = s - self.l[(j, i)] * x[j];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }
}

/// Tridiagonal Gram matrix `DᵀD` of the forward-difference matrix on `n`
/// points, built directly instead of by multiplication.
pub fn difference_gram<T: Scalar>(n: usize) -> Matrix<T> {
    let mut g = Matrix::zeros(n, n);
    let two = T::c(2.0);
    for i in 0..n {
        g[(i, i)] = if i == 0 || i == n - 1 { T::one() } else { two };
        if i + 1 < n {
            g[(i, i + 1)] = -T::one();
            g[(i + 1, i)] = -T::one();
        }
    }
    if n == 1 {
        g[(0, 0)] = T::zero();
    }
    g
}

/// Forward-difference matrix `D` of shape `(n-1) × n`.
pub fn difference_matrix<T: Scalar>(n: usize) -> Matrix<T> {
    assert!(n >= 2, "difference matrix needs at least two points");
    Matrix::from_fn(n - 1, n, |i, j| {
        if j == i {
            -T::one()
        } else if j == i + 1 {
            T::one()
        } else {
            T::zero()
        }
    })
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2_sq<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).sum()
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    norm2_sq(a).sqrt()
}

pub fn max_abs<T: Scalar>(a: &[T]) -> T {
    a.iter().map(|x| x.abs()).fold(T::zero(), T::max)
}

/// `a - b` elementwise.
pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

/// `y += c * x`.
pub fn axpy<T: Scalar>(y: &mut [T], c: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + c * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_matvec(m: &Matrix<f64>, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; m.rows()];
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out[i] += m[(i, j)] * x[j];
            }
        }
        out
    }

    #[test]
    fn matvec_matches_triple_loop() {
        let m = Matrix::from_fn(5, 5, |i, j| ((3 * i + 7 * j) % 11) as f64 / 3.0 - 1.5);
        let x: Vec<f64> = (0..5).map(|i| (i as f64).sin()).collect();
        let got = m.matvec(&x);
        let want = naive_matvec(&m, &x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-14, "{g} vs {w}");
        }
    }

    #[test]
    fn transpose_matvec_agrees() {
        let m = Matrix::from_fn(4, 6, |i, j| (i as f64 - 2.0) * 0.25 + (j as f64) * 0.5);
        let x: Vec<f64> = (0..4).map(|i| 1.0 / (i + 1) as f64).collect();
        let got = m.matvec_t(&x);
        let want = naive_matvec(&m.transpose(), &x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-14);
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // A = BᵀB + I is SPD
        let b = Matrix::from_fn(6, 6, |i, j| ((i * j + 1) as f64).sqrt() / 6.0);
        let mut a = b.gram();
        for i in 0..6 {
            a[(i, i)] += 1.0;
        }
        let rhs: Vec<f64> = (0..6).map(|i| (i as f64) - 2.5).collect();
        let x = a.cholesky().expect("spd").solve(&rhs);
        let res = sub(&a.matvec(&x), &rhs);
        assert!(norm2(&res) <= 1e-12 * norm2(&rhs).max(1.0));
    }

    #[test]
    fn cholesky_reports_null_pivot() {
        let mut a = Matrix::<f64>::zeros(3, 3);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 1.0;
        // a[(2,2)] stays zero -> singular at pivot 2
        assert_eq!(a.cholesky().err(), Some(2));
    }

    #[test]
    fn difference_gram_matches_product() {
        let d = difference_matrix::<f64>(7);
        let g = d.gram();
        let direct = difference_gram::<f64>(7);
        assert!(g.max_abs_diff(&direct) == 0.0);
    }

    #[test]
    fn generic_over_f32() {
        let m = Matrix::<f32>::identity(3);
        let x = vec![1.0f32, -2.0, 3.0];
        assert_eq!(m.matvec(&x), x);
    }
}
