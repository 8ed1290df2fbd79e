//! Green's function blocks `G_xy(z) = [(H - z)^{-1}]_{xy}` and the moments
//! built from them.
//!
//! Two routes exist and are tested against each other:
//!
//! * a dense solve, used up to [`ResolventOptions::dense_cap`] total
//!   dimension, exact for any invertible shift;
//! * block forward elimination along the chain, linear in `n`, used above
//!   the cap. Its pivot blocks can be singular even when `H - z` is not:
//!   in the chiral model at `z = 0` the very first pivot is the zero
//!   potential block, so the recursion reports [`Error::NearSpectrum`]
//!   there by construction. Zero energy in the chiral model is instead
//!   covered exactly by [`zero_energy_corner_block`].
//!
//! The corner identity: for a chiral operator (all `V_x = 0`) with even
//! `n`, eliminating the even sites in `H x = e_n` telescopes to
//!
//! ```text
//! G_1n(0) = (-1)^{n/2} T_1^{-1} T_2* T_3^{-1} T_4* ... T_{n-1}^{-1}
//! ```
//!
//! inverses on odd bonds, adjoints on even bonds. For odd `n` the two
//! sublattices are unbalanced, the kernel has dimension at least `W`, and
//! no zero-energy resolvent exists.
//!
//! All block norms reported here are spectral norms (largest singular
//! value), so that means of `log ||.||` line up with Lyapunov exponents of
//! the corresponding factor products.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::linalg::{inverse_with_condition, lu_factor, spectral_norm};
use crate::mat::ComplexMatrix;
use crate::model::{build_model, BlockTridiagonalOperator, ModelKind};
use crate::rng::RngStream;
use crate::sampling::EntryField;
use crate::Result;

/// Condition number above which a block inversion is treated as singular.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Largest dense dimension `n * W` solved directly.
pub const DEFAULT_DENSE_CAP: usize = 2048;

/// Entry magnitudes are rescaled past this during long corner products to
/// keep the running norm in floating point range.
const RESCALE_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, Copy)]
pub struct ResolventOptions {
    pub dense_cap: usize,
    pub condition_cap: f64,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        ResolventOptions {
            dense_cap: DEFAULT_DENSE_CAP,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

/// `(T^{-1})* = (T*)^{-1}`, with the default condition cap.
pub fn dagger_inverse(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    dagger_inverse_with_cap(t, DEFAULT_CONDITION_CAP)
}

/// `(T^{-1})*`, rejecting condition numbers above `cap`.
pub fn dagger_inverse_with_cap(t: &ComplexMatrix, cap: f64) -> Result<ComplexMatrix> {
    let (inv, _) = inverse_with_condition(t, cap)?;
    Ok(inv.adjoint())
}

/// Corner product with running rescale: returns `(M, log_scale)` where the
/// true corner block is `exp(log_scale) * M`. Shared by the exact corner
/// block and the log-norm samplers, which only need `log_scale + log
/// sigma_max(M)` and therefore never overflow.
fn corner_product(h: &BlockTridiagonalOperator, cap: f64) -> Result<(ComplexMatrix, f64)> {
    if !h.is_chiral() {
        return Err(Error::InvalidArgument(
            "zero-energy corner formula needs a chiral operator (all V_x = 0)".into(),
        ));
    }
    let n = h.n();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "zero-energy corner needs even n; at n = {n} the kernel has dimension >= W"
        )));
    }
    let mut acc = inverse_with_condition(h.t_block(1), cap)?.0;
    let mut log_scale = 0.0;
    for j in 2..n {
        acc = if j % 2 == 0 {
            &acc * &h.t_block(j).adjoint()
        } else {
            &acc * &inverse_with_condition(h.t_block(j), cap)?.0
        };
        let m = acc.max_abs();
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::SingularMatrix {
                cond: f64::INFINITY,
                cap,
            });
        }
        if !(1.0 / RESCALE_LIMIT..=RESCALE_LIMIT).contains(&m) {
            acc = acc.scale(Complex64::new(1.0 / m, 0.0));
            log_scale += m.ln();
        }
    }
    if (n / 2) % 2 == 1 {
        acc = -&acc;
    }
    Ok((acc, log_scale))
}

/// Exact corner block `G_1n(0)` of a chiral operator with even `n`.
pub fn zero_energy_corner_block(h: &BlockTridiagonalOperator) -> Result<ComplexMatrix> {
    zero_energy_corner_block_with_cap(h, DEFAULT_CONDITION_CAP)
}

pub fn zero_energy_corner_block_with_cap(
    h: &BlockTridiagonalOperator,
    cap: f64,
) -> Result<ComplexMatrix> {
    let (m, log_scale) = corner_product(h, cap)?;
    Ok(m.scale(Complex64::new(log_scale.exp(), 0.0)))
}

/// `ln sigma_max(G_1n(0))`, stable for chain lengths whose corner norm
/// leaves floating point range.
pub fn zero_energy_corner_log_norm(h: &BlockTridiagonalOperator, cap: f64) -> Result<f64> {
    let (m, log_scale) = corner_product(h, cap)?;
    Ok(log_scale + spectral_norm(&m).ln())
}

/// One Green's function block with its spectral norm.
#[derive(Debug, Clone)]
pub struct ResolventBlock {
    pub x: usize,
    pub y: usize,
    pub z: Complex64,
    pub block: ComplexMatrix,
    pub norm: f64,
}

/// `G_xy(z)` by dense solve or block elimination, default options.
pub fn resolvent_block(
    h: &BlockTridiagonalOperator,
    z: Complex64,
    x: usize,
    y: usize,
) -> Result<ResolventBlock> {
    resolvent_block_with_opts(h, z, x, y, &ResolventOptions::default())
}

pub fn resolvent_block_with_opts(
    h: &BlockTridiagonalOperator,
    z: Complex64,
    x: usize,
    y: usize,
    opts: &ResolventOptions,
) -> Result<ResolventBlock> {
    let n = h.n();
    for (name, idx) in [("x", x), ("y", y)] {
        if !(1..=n).contains(&idx) {
            return Err(Error::IndexOutOfRange(format!(
                "block index {name} = {idx} outside 1..={n}"
            )));
        }
    }
    let block = if h.dim() <= opts.dense_cap {
        resolvent_block_dense(h, z, x, y, opts)?
    } else {
        resolvent_block_elimination(h, z, x, y, opts)?
    };
    let norm = spectral_norm(&block);
    Ok(ResolventBlock {
        x,
        y,
        z,
        block,
        norm,
    })
}

fn resolvent_block_dense(
    h: &BlockTridiagonalOperator,
    z: Complex64,
    x: usize,
    y: usize,
    opts: &ResolventOptions,
) -> Result<ComplexMatrix> {
    let w = h.width();
    let mut a = h.to_dense();
    for i in 0..a.rows() {
        a[(i, i)] -= z;
    }
    let f = match lu_factor(&a) {
        Ok(f) => f,
        Err(Error::SingularMatrix { .. }) => {
            return Err(Error::NearSpectrum {
                cond: f64::INFINITY,
            })
        }
        Err(e) => return Err(e),
    };
    let ratio = f.pivot_ratio();
    if ratio > opts.condition_cap {
        return Err(Error::NearSpectrum { cond: ratio });
    }
    // Solve only the W columns of the y-th block of the identity.
    let mut rhs = ComplexMatrix::zeros(a.rows(), w);
    for i in 0..w {
        rhs[((y - 1) * w + i, i)] = Complex64::ONE;
    }
    let sol = f.solve(&rhs);
    Ok(sol.block((x - 1) * w, 0, w, w))
}

fn resolvent_block_elimination(
    h: &BlockTridiagonalOperator,
    z: Complex64,
    x: usize,
    y: usize,
    opts: &ResolventOptions,
) -> Result<ComplexMatrix> {
    let n = h.n();
    let w = h.width();
    let id = ComplexMatrix::identity(w);
    let shifted = |j: usize| {
        let mut d = h.v_block(j).clone();
        for i in 0..w {
            d[(i, i)] -= z;
        }
        d
    };
    let near = |e: Error| match e {
        Error::SingularMatrix { cond, .. } => Error::NearSpectrum { cond },
        other => other,
    };
    // Forward pass: pivot blocks C_j = D_j - A_{j-1} C_{j-1}^{-1} B_{j-1}
    // with A_j = -T_j, B_j = -T_j*; right-hand side F_j moves along.
    let mut c_inv: Vec<ComplexMatrix> = Vec::with_capacity(n);
    let mut f: Vec<ComplexMatrix> = Vec::with_capacity(n);
    for j in 1..=n {
        let r_j = if j == y {
            id.clone()
        } else {
            ComplexMatrix::zeros(w, w)
        };
        if j == 1 {
            c_inv.push(
                inverse_with_condition(&shifted(1), opts.condition_cap)
                    .map_err(near)?
                    .0,
            );
            f.push(r_j);
            continue;
        }
        let a_prev = -h.t_block(j - 1);
        let b_prev = -&h.t_block(j - 1).adjoint();
        let carry = &a_prev * &c_inv[j - 2];
        let c_j = shifted(j) - &(&carry * &b_prev);
        c_inv.push(
            inverse_with_condition(&c_j, opts.condition_cap)
                .map_err(near)?
                .0,
        );
        let f_j = r_j - &(&carry * &f[j - 2]);
        f.push(f_j);
    }
    // Back substitution down to the requested block row.
    let mut x_next = &c_inv[n - 1] * &f[n - 1];
    for j in (x..n).rev() {
        let b_j = -&h.t_block(j).adjoint();
        let rhs = &f[j - 1] - &(&b_j * &x_next);
        x_next = &c_inv[j - 1] * &rhs;
    }
    Ok(x_next)
}

/// Monte Carlo setup for moments of one resolvent block.
#[derive(Debug, Clone, Copy)]
pub struct FractionalMomentParams {
    pub n: usize,
    pub width: usize,
    pub kind: ModelKind,
    pub field: EntryField,
    pub z: Complex64,
    /// Moment order, in `(0, 1)`.
    pub s: f64,
    pub x: usize,
    pub y: usize,
}

impl FractionalMomentParams {
    /// Checks the parameter set without drawing anything, so callers can
    /// reject a whole scan grid before spending samples on it.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidDimension(format!(
                "need at least 2 sites, got {}",
                self.n
            )));
        }
        if self.width == 0 {
            return Err(Error::InvalidDimension("zero block width".into()));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "fractional order s must lie in (0, 1), got {}",
                self.s
            )));
        }
        for (name, idx) in [("x", self.x), ("y", self.y)] {
            if !(1..=self.n).contains(&idx) {
                return Err(Error::IndexOutOfRange(format!(
                    "block index {name} = {idx} outside 1..={}",
                    self.n
                )));
            }
        }
        if self.z == Complex64::ZERO && self.kind != ModelKind::Full && !self.n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "chiral models at z = 0 need even n (n = {} is singular)",
                self.n
            )));
        }
        Ok(())
    }

    /// True when the draw can use the closed-form corner product instead of
    /// a linear solve.
    fn corner_route(&self) -> bool {
        self.z == Complex64::ZERO && self.kind != ModelKind::Full && self.x == 1 && self.y == self.n
    }
}

/// `ln ||G_xy(z)||` for one disorder realization drawn from `stream`.
pub fn resolvent_log_norm_sample(
    p: &FractionalMomentParams,
    stream: &RngStream,
    opts: &ResolventOptions,
) -> Result<f64> {
    p.validate()?;
    let h = build_model(p.kind, p.field, p.n, p.width, stream)?;
    if p.corner_route() {
        zero_energy_corner_log_norm(&h, opts.condition_cap)
    } else {
        let b = resolvent_block_with_opts(&h, p.z, p.x, p.y, opts)?;
        Ok(b.norm.ln())
    }
}

#[derive(Debug, Clone)]
pub struct FractionalMomentEstimate {
    pub s: f64,
    /// Sample mean of `||G_xy||^s` over surviving draws.
    pub mean: f64,
    pub std_error: f64,
    pub samples_ok: u64,
    pub failed: u64,
}

impl FractionalMomentEstimate {
    pub fn failure_fraction(&self) -> f64 {
        let total = self.samples_ok + self.failed;
        if total == 0 {
            0.0
        } else {
            self.failed as f64 / total as f64
        }
    }
}

/// Mean of `||G_xy(z)||^s` over `samples` disorder draws on consecutive
/// substreams of `stream`. Draws whose solves fail numerically are skipped
/// and counted; more than half failing aborts with
/// [`Error::TooManyFailures`].
pub fn fractional_moment_estimate(
    p: &FractionalMomentParams,
    samples: u64,
    stream: &RngStream,
) -> Result<FractionalMomentEstimate> {
    fractional_moment_estimate_with_opts(p, samples, stream, &ResolventOptions::default())
}

pub fn fractional_moment_estimate_with_opts(
    p: &FractionalMomentParams,
    samples: u64,
    stream: &RngStream,
    opts: &ResolventOptions,
) -> Result<FractionalMomentEstimate> {
    p.validate()?;
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut ok = 0u64;
    let mut failed = 0u64;
    for i in 0..samples {
        match resolvent_log_norm_sample(p, &stream.substream(i), opts) {
            Ok(log_norm) => {
                let v = (p.s * log_norm).exp();
                sum += v;
                sum_sq += v * v;
                ok += 1;
            }
            Err(e) if e.is_usage() => return Err(e),
            Err(_) => failed += 1,
        }
    }
    if failed * 2 > samples || ok < 2 {
        return Err(Error::TooManyFailures {
            failed,
            attempted: samples,
        });
    }
    let mean = sum / ok as f64;
    let var = (sum_sq / ok as f64 - mean * mean).max(0.0);
    Ok(FractionalMomentEstimate {
        s: p.s,
        mean,
        std_error: (var / ok as f64).sqrt(),
        samples_ok: ok,
        failed,
    })
}

/// Corner log norms for the decay scans.
#[derive(Debug, Clone)]
pub struct CornerDecaySamples {
    /// `ln sigma_max(G_1n(0))` for each surviving draw, in draw order.
    pub log_norms: Vec<f64>,
    /// Substream offsets of the draws whose factor inversions failed.
    pub failed_indices: Vec<u64>,
}

/// One corner log-norm draw of the chiral model (identity odd bonds).
pub fn corner_log_norm_sample(
    n: usize,
    width: usize,
    field: EntryField,
    stream: &RngStream,
    cap: f64,
) -> Result<f64> {
    let h = crate::model::build_chiral_model_in_field(n, width, field, stream)?;
    zero_energy_corner_log_norm(&h, cap)
}

/// `samples` corner draws on consecutive substreams. Failures are recorded,
/// not fatal; callers decide how many they tolerate.
pub fn log_norm_corner(
    n: usize,
    width: usize,
    samples: u64,
    stream: &RngStream,
    field: EntryField,
) -> Result<CornerDecaySamples> {
    if !n.is_multiple_of(2) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "corner decay needs even n >= 2, got {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut log_norms = Vec::new();
    let mut failed_indices = Vec::new();
    for i in 0..samples {
        match corner_log_norm_sample(n, width, field, &stream.substream(i), DEFAULT_CONDITION_CAP) {
            Ok(v) => log_norms.push(v),
            Err(e) if e.is_usage() => return Err(e),
            Err(_) => failed_indices.push(i),
        }
    }
    Ok(CornerDecaySamples {
        log_norms,
        failed_indices,
    })
}
