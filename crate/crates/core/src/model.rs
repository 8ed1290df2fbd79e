//! Block tridiagonal Hamiltonians on a chain of `n` sites carrying `W`
//! internal channels.
//!
//! The dense form of the operator is
//!
//! ```text
//!     [  V_1  -T_1*                * = conjugate transpose
//!      -T_1    V_2  -T_2*
//!            -T_2    V_3  ...   ]
//! ```
//!
//! with Hermitian potential blocks `V_x` on the diagonal and hopping blocks
//! `T_x` coupling sites `x` and `x + 1`. Block positions are 1-based
//! throughout, matching the chain coordinate.
//!
//! When every `V_x` vanishes the operator anticommutes with the sublattice
//! signature `S = (-1)^x (x) 1_W`, so its spectrum is symmetric about zero;
//! for odd `n` that symmetry forces a kernel of dimension at least `W`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::mat::ComplexMatrix;
use crate::rng::RngStream;
use crate::sampling::{self, EntryField};
use crate::Result;

/// Which ensemble fills the blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// GUE potential blocks and Gaussian hopping blocks.
    Full,
    /// No potential; identity hopping on odd bonds, Gaussian on even bonds.
    Chiral,
    /// No potential; Gaussian hopping on every bond.
    GeneralChiral,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Chiral => "chiral",
            ModelKind::GeneralChiral => "general-chiral",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiagonalOperator {
    width: usize,
    v_blocks: Vec<ComplexMatrix>,
    t_blocks: Vec<ComplexMatrix>,
}

impl BlockTridiagonalOperator {
    /// Assembles an operator from explicit blocks: `n >= 2` potential
    /// blocks `V_1..V_n` and `n - 1` hopping blocks `T_1..T_{n-1}`, all
    /// `W x W`, with every `V_x` Hermitian to working precision.
    pub fn from_parts(v_blocks: Vec<ComplexMatrix>, t_blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let n = v_blocks.len();
        if n < 2 {
            return Err(Error::InvalidDimension(format!(
                "need at least 2 potential blocks, got {n}"
            )));
        }
        if t_blocks.len() != n - 1 {
            return Err(Error::InvalidDimension(format!(
                "{n} potential blocks need {} hopping blocks, got {}",
                n - 1,
                t_blocks.len()
            )));
        }
        let width = v_blocks[0].rows();
        if width == 0 {
            return Err(Error::InvalidDimension("zero block width".into()));
        }
        for (x, v) in v_blocks.iter().enumerate() {
            if v.rows() != width || v.cols() != width {
                return Err(Error::InvalidDimension(format!(
                    "potential block {} is {}x{}, expected {width}x{width}",
                    x + 1,
                    v.rows(),
                    v.cols()
                )));
            }
            let defect = v.hermitian_defect();
            if defect > 1e-12 * (1.0 + v.max_abs()) {
                return Err(Error::InvalidArgument(format!(
                    "potential block {} is not Hermitian (defect {defect:.3e})",
                    x + 1
                )));
            }
        }
        for (x, t) in t_blocks.iter().enumerate() {
            if t.rows() != width || t.cols() != width {
                return Err(Error::InvalidDimension(format!(
                    "hopping block {} is {}x{}, expected {width}x{width}",
                    x + 1,
                    t.rows(),
                    t.cols()
                )));
            }
        }
        Ok(BlockTridiagonalOperator {
            width,
            v_blocks,
            t_blocks,
        })
    }

    /// Number of chain sites.
    pub fn n(&self) -> usize {
        self.v_blocks.len()
    }

    /// Channels per site.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Dense dimension `n * W`.
    pub fn dim(&self) -> usize {
        self.n() * self.width
    }

    /// Potential block at site `x` (1-based).
    pub fn v_block(&self, x: usize) -> &ComplexMatrix {
        assert!(
            (1..=self.n()).contains(&x),
            "potential block index {x} out of 1..={}",
            self.n()
        );
        &self.v_blocks[x - 1]
    }

    /// Hopping block on the bond between sites `x` and `x + 1` (1-based).
    pub fn t_block(&self, x: usize) -> &ComplexMatrix {
        assert!(
            (1..self.n()).contains(&x),
            "hopping block index {x} out of 1..={}",
            self.n() - 1
        );
        &self.t_blocks[x - 1]
    }

    pub fn v_blocks(&self) -> &[ComplexMatrix] {
        &self.v_blocks
    }

    pub fn t_blocks(&self) -> &[ComplexMatrix] {
        &self.t_blocks
    }

    /// True when every potential block is exactly zero, so the operator
    /// anticommutes with the sublattice signature.
    pub fn is_chiral(&self) -> bool {
        self.v_blocks
            .iter()
            .all(|v| v.data().iter().all(|&z| z == Complex64::ZERO))
    }

    /// Dense `nW x nW` realization.
    pub fn to_dense(&self) -> ComplexMatrix {
        let w = self.width;
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        for (x, v) in self.v_blocks.iter().enumerate() {
            h.set_block(x * w, x * w, v);
        }
        for (x, t) in self.t_blocks.iter().enumerate() {
            h.set_block((x + 1) * w, x * w, &-t);
            h.set_block(x * w, (x + 1) * w, &-&t.adjoint());
        }
        h
    }
}

/// Sublattice signature `S = (-1)^x (x) 1_W`: the grading that chiral
/// operators anticommute with. `S^2 = 1` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChiralSignature {
    n: usize,
    width: usize,
}

impl ChiralSignature {
    pub fn new(n: usize, width: usize) -> Self {
        ChiralSignature { n, width }
    }

    /// Sign carried by site `x` (1-based): `(-1)^x`.
    pub fn block_sign(&self, x: usize) -> f64 {
        assert!(
            (1..=self.n).contains(&x),
            "site index {x} out of 1..={}",
            self.n
        );
        if x.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let w = self.width;
        let mut s = ComplexMatrix::zeros(self.n * w, self.n * w);
        for x in 1..=self.n {
            let sign = self.block_sign(x);
            for i in 0..w {
                s[((x - 1) * w + i, (x - 1) * w + i)] = Complex64::new(sign, 0.0);
            }
        }
        s
    }
}

/// Frobenius norm of the anticommutator `{S, H} = SH + HS` with the
/// sublattice signature, computed block by block on the band.
///
/// Block `(x, y)` of the anticommutator is `(s_x + s_y) H_xy`: the parity
/// factor is `2 (-1)^x` on diagonal blocks and vanishes on hopping blocks,
/// so only the potential contributes. Exactly zero iff chiral.
pub fn anticommutator_norm(h: &BlockTridiagonalOperator) -> f64 {
    let sig = ChiralSignature::new(h.n(), h.width());
    let mut acc = 0.0;
    for x in 1..=h.n() {
        let factor = 2.0 * sig.block_sign(x);
        let f = h.v_block(x).frobenius_norm();
        acc += factor * factor * f * f;
    }
    for x in 1..h.n() {
        let factor = sig.block_sign(x) + sig.block_sign(x + 1);
        let f = h.t_block(x).frobenius_norm();
        // Adjacent sites carry opposite signs, so this term is identically
        // zero; both band sides would contribute equally.
        acc += 2.0 * factor * factor * f * f;
    }
    acc.sqrt()
}

/// Draws `V_1..V_n` (GUE) then `T_1..T_{n-1}` in the given field, all from
/// one pass over the stream.
pub fn build_full_model_in_field(
    n: usize,
    width: usize,
    field: EntryField,
    stream: &RngStream,
) -> Result<BlockTridiagonalOperator> {
    check_sites(n)?;
    let mut g = stream.gaussian();
    let v_blocks: Result<Vec<_>> = (0..n).map(|_| sampling::gue_with(&mut g, width)).collect();
    let t_blocks: Result<Vec<_>> = (0..n - 1)
        .map(|_| sampling::hopping_with(field, &mut g, width))
        .collect();
    BlockTridiagonalOperator::from_parts(v_blocks?, t_blocks?)
}

/// Zero potential, identity hopping on odd bonds, Gaussian hopping on even
/// bonds (drawn in increasing bond order).
pub fn build_chiral_model_in_field(
    n: usize,
    width: usize,
    field: EntryField,
    stream: &RngStream,
) -> Result<BlockTridiagonalOperator> {
    check_sites(n)?;
    if width == 0 {
        return Err(Error::InvalidDimension("zero block width".into()));
    }
    let mut g = stream.gaussian();
    let v_blocks = (0..n).map(|_| ComplexMatrix::zeros(width, width)).collect();
    let t_blocks: Result<Vec<_>> = (1..n)
        .map(|x| {
            if x % 2 == 1 {
                Ok(ComplexMatrix::identity(width))
            } else {
                sampling::hopping_with(field, &mut g, width)
            }
        })
        .collect();
    BlockTridiagonalOperator::from_parts(v_blocks, t_blocks?)
}

/// Zero potential, Gaussian hopping on every bond.
pub fn build_general_chiral_model_in_field(
    n: usize,
    width: usize,
    field: EntryField,
    stream: &RngStream,
) -> Result<BlockTridiagonalOperator> {
    check_sites(n)?;
    if width == 0 {
        return Err(Error::InvalidDimension("zero block width".into()));
    }
    let mut g = stream.gaussian();
    let v_blocks = (0..n).map(|_| ComplexMatrix::zeros(width, width)).collect();
    let t_blocks: Result<Vec<_>> = (1..n)
        .map(|_| sampling::hopping_with(field, &mut g, width))
        .collect();
    BlockTridiagonalOperator::from_parts(v_blocks, t_blocks?)
}

/// Complex-field full model.
pub fn build_full_model(
    n: usize,
    width: usize,
    stream: &RngStream,
) -> Result<BlockTridiagonalOperator> {
    build_full_model_in_field(n, width, EntryField::Complex, stream)
}

/// Complex-field chiral model.
pub fn build_chiral_model(
    n: usize,
    width: usize,
    stream: &RngStream,
) -> Result<BlockTridiagonalOperator> {
    build_chiral_model_in_field(n, width, EntryField::Complex, stream)
}

/// Complex-field general chiral model.
pub fn build_general_chiral_model(
    n: usize,
    width: usize,
    stream: &RngStream,
) -> Result<BlockTridiagonalOperator> {
    build_general_chiral_model_in_field(n, width, EntryField::Complex, stream)
}

/// Builder dispatch on kind and field.
pub fn build_model(
    kind: ModelKind,
    field: EntryField,
    n: usize,
    width: usize,
    stream: &RngStream,
) -> Result<BlockTridiagonalOperator> {
    match kind {
        ModelKind::Full => build_full_model_in_field(n, width, field, stream),
        ModelKind::Chiral => build_chiral_model_in_field(n, width, field, stream),
        ModelKind::GeneralChiral => build_general_chiral_model_in_field(n, width, field, stream),
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least 2 sites, got {n}"
        )));
    }
    Ok(())
}
