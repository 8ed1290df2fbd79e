//! Dense complex matrices, row-major, sized at runtime.
//!
//! Arithmetic on mismatched shapes panics: shape agreement is a programming
//! invariant here, not a recoverable condition. Fallible numerics
//! (inversion, factorization) live in [`crate::linalg`] and return errors.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
// Brings sqrt and friends into scope for no_std builds; redundant under std.
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Wraps a row-major buffer. Panics if the length is not `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length mismatch");
        ComplexMatrix { rows, cols, data }
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

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|&x| x * s).collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.norm_sqr())
            .fold(0.0, |a, b| a + b)
            .sqrt()
    }

    /// Largest entry modulus; zero for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)].norm())
                    .fold(0.0, |a, b| a + b)
            })
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// `||A - A*||_F`, zero iff Hermitian. Panics if not square.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square(), "hermitian defect needs a square matrix");
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Copy of the `height x width` block whose top-left entry is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, height: usize, width: usize) -> Self {
        assert!(
            r0 + height <= self.rows && c0 + width <= self.cols,
            "block out of range"
        );
        Self::from_fn(height, width, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Writes `b` into the block whose top-left entry is `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &ComplexMatrix) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "block out of range"
        );
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "shape mismatch in add"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert!(
            self.rows == rhs.rows && self.cols == rhs.cols,
            "shape mismatch in sub"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

impl Add<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        &self + rhs
    }
}

impl Sub<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        &self - rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-Complex64::ONE)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        // ikj order keeps the inner loop contiguous in both operands.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let row = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[row + j];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_multiplicative_unit() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, (i * j) as f64));
        let id = ComplexMatrix::identity(3);
        assert_eq!(&a * &id, a);
        assert_eq!(&id * &a, a);
    }

    #[test]
    fn adjoint_is_an_involution_and_reverses_products() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 2, |i, j| c(j as f64, i as f64 * 0.25));
        assert_eq!(a.adjoint().adjoint(), a);
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        assert!((&lhs - &rhs).max_abs() < 1e-14);
    }

    #[test]
    fn norms_agree_on_a_known_matrix() {
        // [[3, 4i], [0, -2]]: Frobenius sqrt(29), inf-norm 7, max abs 4.
        let mut a = ComplexMatrix::zeros(2, 2);
        a[(0, 0)] = c(3.0, 0.0);
        a[(0, 1)] = c(0.0, 4.0);
        a[(1, 1)] = c(-2.0, 0.0);
        assert!((a.frobenius_norm() - 29f64.sqrt()).abs() < 1e-15);
        assert!((a.inf_norm() - 7.0).abs() < 1e-15);
        assert!((a.max_abs() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn hermitian_defect_detects_asymmetry() {
        let mut a = ComplexMatrix::zeros(2, 2);
        a[(0, 1)] = c(1.0, 2.0);
        a[(1, 0)] = c(1.0, -2.0);
        assert_eq!(a.hermitian_defect(), 0.0);
        a[(1, 0)] = c(1.0, 2.0);
        assert!(a.hermitian_defect() > 1.0);
    }

    #[test]
    fn block_roundtrip() {
        let a = ComplexMatrix::from_fn(4, 6, |i, j| c(i as f64, j as f64));
        let b = a.block(1, 2, 2, 3);
        assert_eq!(b[(0, 0)], c(1.0, 2.0));
        assert_eq!(b[(1, 2)], c(2.0, 4.0));
        let mut z = ComplexMatrix::zeros(4, 6);
        z.set_block(1, 2, &b);
        assert_eq!(z[(2, 4)], c(2.0, 4.0));
        assert_eq!(z[(0, 0)], Complex64::ZERO);
    }

    #[test]
    #[should_panic(expected = "shape mismatch")]
    fn mismatched_add_panics() {
        let a = ComplexMatrix::zeros(2, 2);
        let b = ComplexMatrix::zeros(2, 3);
        let _ = &a + &b;
    }
}
