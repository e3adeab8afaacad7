//! Small dense complex matrices.
//!
//! Everything in this crate lives in Hilbert spaces of dimension well under a
//! few hundred, so a row-major `Vec` with naive products is all that is needed.
//! The two non-trivial routines are the operator norm (largest singular value,
//! via Jacobi diagonalisation of `M†M`) and the matrix exponential (scaling and
//! squaring on a truncated Taylor series).

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[&[Complex<T>]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self { rows: n, cols: m, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(v).fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Principal submatrix on the given (row and column) indices.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |r, c| self[(idx[r], idx[c])])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest entrywise deviation of `M†M` from the identity, restricted to
    /// the columns in `support` (all columns when `None`).
    pub fn unitarity_deviation(&self, support: Option<&[usize]>) -> T {
        let all: Vec<usize>;
        let cols = match support {
            Some(s) => s,
            None => {
                all = (0..self.cols).collect();
                &all
            }
        };
        let mut worst = T::zero();
        for (a, &j) in cols.iter().enumerate() {
            for &k in &cols[a..] {
                let mut dot = Complex::zero();
                for r in 0..self.rows {
                    dot += self[(r, j)].conj() * self[(r, k)];
                }
                if j == k {
                    dot -= Complex::one();
                }
                worst = worst.max(dot.norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation of `M` from `M†`.
    pub fn hermiticity_deviation(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// `H = A + iB` is mapped to the real symmetric `[[A, -B], [B, A]]`, whose
    /// spectrum is that of `H` with every eigenvalue doubled, and diagonalised
    /// with cyclic Jacobi rotations.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows;
        let m = 2 * n;
        let mut a = vec![T::zero(); m * m];
        for r in 0..n {
            for c in 0..n {
                let z = self[(r, c)];
                a[r * m + c] = z.re;
                a[(r + n) * m + c + n] = z.re;
                a[r * m + c + n] = -z.im;
                a[(r + n) * m + c] = z.im;
            }
        }
        let mut eig = jacobi_eigenvalues(&mut a, m);
        eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        eig.into_iter().step_by(2).collect()
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> T {
        if self.data.is_empty() || self.max_abs() == T::zero() {
            return T::zero();
        }
        let gram = &self.adjoint() * self;
        let top = gram.hermitian_eigenvalues().last().copied().unwrap_or_else(T::zero);
        top.max(T::zero()).sqrt()
    }

    /// Matrix exponential by scaling and squaring a Taylor series.
    pub fn expm(&self) -> Self {
        assert!(self.is_square(), "exponential of a non-square matrix");
        let n = self.rows;
        // Any consistent norm bounds the spectral radius; the max row sum is cheap.
        let norm = (0..n)
            .map(|r| (0..n).fold(T::zero(), |s, c| s + self[(r, c)].norm()))
            .fold(T::zero(), T::max);
        let mut squarings = 0i32;
        let half = T::lit(0.5);
        let mut scaled_norm = norm;
        while scaled_norm > half {
            scaled_norm = scaled_norm * half;
            squarings += 1;
        }
        let a = self.scale(Complex::new(T::lit(2f64.powi(-squarings)), T::zero()));
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=30 {
            term = (&term * &a).scale(Complex::new(T::one() / T::lit(k as f64), T::zero()));
            result = &result + &term;
            if term.max_abs() <= T::epsilon() * T::lit(1e-3) {
                break;
            }
        }
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }
}

/// Cyclic Jacobi eigenvalue iteration on a real symmetric row-major matrix.
/// Consumes `a` as scratch space.
fn jacobi_eigenvalues<T: Real>(a: &mut [T], n: usize) -> Vec<T> {
    let frob = a.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    let threshold = frob * T::epsilon() * T::lit(1e-2);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cis, im, re};

    type M = CMatrix<f64>;

    fn pauli_y() -> M {
        M::from_rows(&[&[re(0.0), im(-1.0)], &[im(1.0), re(0.0)]])
    }

    #[test]
    fn eigenvalues_of_pauli_y() {
        let ev = pauli_y().hermitian_eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_matches_known_values() {
        assert!((pauli_y().op_norm() - 1.0).abs() < 1e-14);
        // [[1, 1], [0, 1]] has largest singular value the golden ratio.
        let shear = M::from_rows(&[&[re(1.0), re(1.0)], &[re(0.0), re(1.0)]]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((shear.op_norm() - phi).abs() < 1e-13);
        assert_eq!(M::zeros(3, 3).op_norm(), 0.0);
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-i θ σy) = cos θ I - i sin θ σy
        let theta = 0.7;
        let u = pauli_y().scale(im(-theta)).expm();
        let expected = M::from_rows(&[
            &[re(theta.cos()), re(-theta.sin())],
            &[re(theta.sin()), re(theta.cos())],
        ]);
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn expm_of_large_diagonal() {
        let d: Vec<_> = (0..5).map(|k| im(3.0 * k as f64)).collect();
        let u = M::from_diagonal(&d).expm();
        let expected = M::from_diagonal(&(0..5).map(|k| cis(3.0 * k as f64)).collect::<Vec<_>>());
        assert!(u.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn kron_layout_is_row_major() {
        let x = M::from_rows(&[&[re(0.0), re(1.0)], &[re(1.0), re(0.0)]]);
        let k = x.kron(&M::identity(3));
        assert_eq!(k[(0, 3)], re(1.0));
        assert_eq!(k[(4, 1)], re(1.0));
        assert_eq!(k[(0, 1)], re(0.0));
    }

    #[test]
    fn unitarity_deviation_respects_support() {
        let mut m = M::identity(3);
        m[(2, 2)] = re(2.0);
        assert!(m.unitarity_deviation(Some(&[0, 1])) == 0.0);
        assert!(m.unitarity_deviation(None) > 1.0);
    }
}
