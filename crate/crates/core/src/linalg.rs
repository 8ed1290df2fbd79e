//! Dense complex factorizations: partial-pivot LU, Householder QR with a
//! positive-diagonal convention, and one-sided Jacobi singular values.
//!
//! These are textbook algorithms written for the matrix sizes this crate
//! actually meets (block widths up to a few hundred). The QR positive
//! convention and the singular value accuracy at extreme rank deficiency
//! are load-bearing: Lyapunov estimates read `log r_kk` directly, and the
//! kernel detector needs `sigma_min / sigma_max` down to 1e-16, which a
//! normal-equations SVD could not deliver.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::mat::ComplexMatrix;
use crate::Result;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Compact LU factorization `PA = LU` with partial pivoting.
///
/// `lu` stores the unit lower triangle strictly below the diagonal and `U`
/// on and above it; `perm[i]` is the row of `A` that became row `i` of `PA`.
pub struct LuFactors {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

/// Factors a square matrix, pivoting on the largest column entry.
///
/// A pivot below `n * eps * max_abs(A)` means the matrix is singular to
/// working precision and yields [`Error::SingularMatrix`].
pub fn lu_factor(a: &ComplexMatrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "LU needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::InvalidDimension("LU of an empty matrix".into()));
    }
    let tiny = n as f64 * f64::EPSILON * a.max_abs();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].norm_sqr();
        for i in k + 1..n {
            let v = lu[(i, k)].norm_sqr();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best.sqrt() <= tiny {
            return Err(Error::SingularMatrix {
                cond: f64::INFINITY,
                cap: f64::INFINITY,
            });
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            perm.swap(k, p);
        }
        let inv_piv = lu[(k, k)].finv();
        for i in k + 1..n {
            let m = lu[(i, k)] * inv_piv;
            lu[(i, k)] = m;
            for j in k + 1..n {
                let s = lu[(k, j)];
                lu[(i, j)] -= m * s;
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        assert_eq!(b.rows(), n, "right-hand side height mismatch");
        let m = b.cols();
        let mut x = ComplexMatrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                x[(i, j)] = b[(self.perm[i], j)];
            }
        }
        // Unit lower triangle, then upper triangle.
        for i in 1..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                for j in 0..m {
                    let s = x[(k, j)];
                    x[(i, j)] -= l * s;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                for j in 0..m {
                    let s = x[(k, j)];
                    x[(i, j)] -= u * s;
                }
            }
            let d = self.lu[(i, i)].finv();
            for j in 0..m {
                x[(i, j)] *= d;
            }
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve(&ComplexMatrix::identity(self.dim()))
    }

    /// `ln |det A|`, the sum of log pivot magnitudes.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.lu[(i, i)].norm().ln())
            .fold(0.0, |a, b| a + b)
    }

    /// Ratio of largest to smallest pivot magnitude; a cheap growth proxy
    /// for how close the matrix is to singular.
    pub fn pivot_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..self.dim() {
            let v = self.lu[(i, i)].norm();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// Inverse together with the infinity-norm condition number
/// `||A||_inf * ||A^-1||_inf`, rejected above `cap`.
pub fn inverse_with_condition(a: &ComplexMatrix, cap: f64) -> Result<(ComplexMatrix, f64)> {
    let f = lu_factor(a)?;
    let inv = f.inverse();
    let cond = a.inf_norm() * inv.inf_norm();
    if !cond.is_finite() || cond > cap {
        return Err(Error::SingularMatrix { cond, cap });
    }
    Ok((inv, cond))
}

/// Householder QR of a square matrix, normalized so every diagonal entry of
/// `R` is real and positive. With that convention the factorization is
/// unique for invertible input, which makes QR-accumulated log sums
/// well defined.
pub fn qr_positive(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::InvalidDimension(format!(
            "QR needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::InvalidDimension("QR of an empty matrix".into()));
    }
    let tiny = n as f64 * f64::EPSILON * a.max_abs();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![Complex64::ZERO; n];
    for k in 0..n {
        let mut norm_sq = 0.0;
        for i in k..n {
            norm_sq += r[(i, k)].norm_sqr();
        }
        let norm_x = norm_sq.sqrt();
        if norm_x <= tiny {
            return Err(Error::SingularMatrix {
                cond: f64::INFINITY,
                cap: f64::INFINITY,
            });
        }
        let x0 = r[(k, k)];
        let phase = if x0 == Complex64::ZERO {
            Complex64::ONE
        } else {
            x0 / x0.norm()
        };
        // Reflect x onto -phase * |x| e1; v = x - alpha e1 never cancels.
        let alpha = -phase * norm_x;
        v[k] = x0 - alpha;
        for i in k + 1..n {
            v[i] = r[(i, k)];
        }
        let vnorm_sq: f64 = (k..n).map(|i| v[i].norm_sqr()).sum();
        let tau = 2.0 / vnorm_sq;
        // R <- H R on the trailing columns, with H = I - tau v v*.
        for j in k + 1..n {
            let mut w = Complex64::ZERO;
            for i in k..n {
                w += v[i].conj() * r[(i, j)];
            }
            w *= tau;
            for i in k..n {
                r[(i, j)] -= w * v[i];
            }
        }
        r[(k, k)] = alpha;
        for i in k + 1..n {
            r[(i, k)] = Complex64::ZERO;
        }
        // Q <- Q H, row by row.
        for i in 0..n {
            let mut w = Complex64::ZERO;
            for j in k..n {
                w += q[(i, j)] * v[j];
            }
            w *= tau;
            for j in k..n {
                q[(i, j)] -= w * v[j].conj();
            }
        }
    }
    // Phase pass: divide row k of R and multiply column k of Q by the
    // diagonal phase, leaving R with a positive real diagonal.
    for k in 0..n {
        let d = r[(k, k)];
        let m = d.norm();
        if m <= tiny {
            return Err(Error::SingularMatrix {
                cond: f64::INFINITY,
                cap: f64::INFINITY,
            });
        }
        let phase = d / m;
        let conj_phase = phase.conj();
        for j in k..n {
            r[(k, j)] *= conj_phase;
        }
        r[(k, k)] = Complex64::new(m, 0.0);
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    Ok((q, r))
}

/// Singular values in descending order, by one-sided Jacobi on columns.
///
/// Rotations act on the matrix itself, never on `A* A`, so tiny singular
/// values keep full relative accuracy; ratios near 1e-16 are meaningful.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    // Work on the taller orientation so columns outnumber rows never.
    let mut u = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.adjoint()
    };
    let m = u.rows();
    let n = u.cols();
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let tol = 1e-15;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::ZERO;
                for i in 0..m {
                    let x = u[(i, p)];
                    let y = u[(i, q)];
                    app += x.norm_sqr();
                    aqq += y.norm_sqr();
                    apq += x.conj() * y;
                }
                let g = apq.norm();
                if app == 0.0 || aqq == 0.0 || g <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = apq / g;
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    let s = if zeta > 0.0 { 1.0 } else { -1.0 };
                    s / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let conj_phase = phase.conj();
                for i in 0..m {
                    let x = u[(i, p)];
                    let y = u[(i, q)] * conj_phase;
                    u[(i, p)] = x.scale(cs) - y.scale(sn);
                    u[(i, q)] = x.scale(sn) + y.scale(cs);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // Scaled column norms: squaring directly would underflow below 1e-154.
    let mut sv: Vec<f64> = (0..n)
        .map(|j| {
            let scale = (0..m)
                .map(|i| f64::max(u[(i, j)].re.abs(), u[(i, j)].im.abs()))
                .fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let inv = 1.0 / scale;
            let s: f64 = (0..m)
                .map(|i| {
                    let x = u[(i, j)].re * inv;
                    let y = u[(i, j)].im * inv;
                    x * x + y * y
                })
                .sum();
            scale * s.sqrt()
        })
        .collect();
    sv.sort_unstable_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}
