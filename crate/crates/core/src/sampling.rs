//! Gaussian matrix ensembles, normalized so second moments scale as `1/W`.
//!
//! Two hopping ensembles share that scaling and differ only in the entry
//! field:
//!
//! * [`EntryField::Complex`]: iid complex Gaussian entries with
//!   `E|a_ij|^2 = 1/W` (density proportional to `exp(-W ||A||_F^2)`).
//! * [`EntryField::Real`]: iid real Gaussian entries with `E a_ij^2 = 1/W`.
//!
//! The distinction matters downstream: the Lyapunov spectrum of products of
//! these blocks has a different closed form in each field (see
//! [`crate::lyapunov`]), while low moments and the `1/W` decay scaling law
//! look alike. The complex field is the default everywhere.
//!
//! Draw order is part of the contract, because reproducibility across
//! versions depends on it: entries are generated row major, real part
//! before imaginary part; the GUE sampler walks the upper triangle row
//! major, diagonal included, and fills the lower triangle by conjugation,
//! so Hermiticity holds exactly rather than to rounding.

use alloc::format;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::mat::ComplexMatrix;
use crate::rng::{GaussianSource, RngStream};
use crate::Result;

/// Which field the hopping block entries live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntryField {
    Complex,
    Real,
}

impl EntryField {
    pub fn name(&self) -> &'static str {
        match self {
            EntryField::Complex => "complex",
            EntryField::Real => "real",
        }
    }
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 {
        return Err(Error::InvalidDimension(format!(
            "ensemble width must be positive, got {width}"
        )));
    }
    Ok(())
}

/// Complex Ginibre block drawn from an already positioned source.
/// Model builders use this to fill many blocks from one stream pass.
pub fn ginibre_with(g: &mut GaussianSource, width: usize) -> Result<ComplexMatrix> {
    check_width(width)?;
    let sigma = 1.0 / (2.0 * width as f64).sqrt();
    Ok(ComplexMatrix::from_fn(width, width, |_, _| {
        let re = g.standard_normal();
        let im = g.standard_normal();
        Complex64::new(sigma * re, sigma * im)
    }))
}

/// Real Gaussian block drawn from an already positioned source.
pub fn ginibre_real_with(g: &mut GaussianSource, width: usize) -> Result<ComplexMatrix> {
    check_width(width)?;
    let sigma = 1.0 / (width as f64).sqrt();
    Ok(ComplexMatrix::from_fn(width, width, |_, _| {
        Complex64::new(sigma * g.standard_normal(), 0.0)
    }))
}

/// Hopping block in the requested field from an already positioned source.
pub fn hopping_with(
    field: EntryField,
    g: &mut GaussianSource,
    width: usize,
) -> Result<ComplexMatrix> {
    match field {
        EntryField::Complex => ginibre_with(g, width),
        EntryField::Real => ginibre_real_with(g, width),
    }
}

/// GUE block drawn from an already positioned source.
pub fn gue_with(g: &mut GaussianSource, width: usize) -> Result<ComplexMatrix> {
    check_width(width)?;
    let diag_sigma = 1.0 / (2.0 * width as f64).sqrt();
    let off_sigma = 1.0 / (4.0 * width as f64).sqrt();
    let mut v = ComplexMatrix::zeros(width, width);
    for i in 0..width {
        v[(i, i)] = Complex64::new(diag_sigma * g.standard_normal(), 0.0);
        for j in i + 1..width {
            let re = off_sigma * g.standard_normal();
            let im = off_sigma * g.standard_normal();
            v[(i, j)] = Complex64::new(re, im);
            v[(j, i)] = Complex64::new(re, -im);
        }
    }
    Ok(v)
}

/// Complex Ginibre block: iid entries with `E|a|^2 = 1/W`.
pub fn sample_ginibre(width: usize, stream: &RngStream) -> Result<ComplexMatrix> {
    ginibre_with(&mut stream.gaussian(), width)
}

/// Real Gaussian block with the same second moment, `E a^2 = 1/W`, stored
/// as complex entries with zero imaginary part.
pub fn sample_ginibre_real(width: usize, stream: &RngStream) -> Result<ComplexMatrix> {
    ginibre_real_with(&mut stream.gaussian(), width)
}

/// Hopping block in the requested field.
pub fn sample_hopping(
    field: EntryField,
    width: usize,
    stream: &RngStream,
) -> Result<ComplexMatrix> {
    hopping_with(field, &mut stream.gaussian(), width)
}

/// GUE block: Hermitian with `E V_ii^2 = 1/(2W)` on the diagonal and
/// `E|V_ij|^2 = 1/(2W)` off it. The spectrum concentrates on
/// `[-sqrt(2), sqrt(2)]` as the width grows.
pub fn sample_gue(width: usize, stream: &RngStream) -> Result<ComplexMatrix> {
    gue_with(&mut stream.gaussian(), width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let s = RngStream::with_index(5, 9);
        assert_eq!(
            sample_ginibre(3, &s).unwrap(),
            sample_ginibre(3, &s).unwrap()
        );
        assert_eq!(sample_gue(3, &s).unwrap(), sample_gue(3, &s).unwrap());
        let other = RngStream::with_index(5, 10);
        assert_ne!(
            sample_ginibre(3, &s).unwrap(),
            sample_ginibre(3, &other).unwrap()
        );
    }

    #[test]
    fn zero_width_is_rejected() {
        let s = RngStream::new(1);
        assert!(sample_ginibre(0, &s).is_err());
        assert!(sample_ginibre_real(0, &s).is_err());
        assert!(sample_gue(0, &s).is_err());
    }

    /// Mean of `|a|^2` over `count` matrices drawn from consecutive
    /// substreams, with the sample standard error.
    fn second_moment(
        count: u64,
        draw: impl Fn(&RngStream) -> ComplexMatrix,
        pick: impl Fn(&ComplexMatrix) -> Complex64,
    ) -> (f64, f64) {
        let base = RngStream::new(171);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..count {
            let m = draw(&base.substream(i));
            let v = pick(&m).norm_sqr();
            sum += v;
            sum_sq += v * v;
        }
        let n = count as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn ginibre_second_moment_scales_as_one_over_width() {
        for &w in &[1usize, 4] {
            let (mean, se) =
                second_moment(4000, |s| sample_ginibre(w, s).unwrap(), |m| m[(0, w - 1)]);
            let expect = 1.0 / w as f64;
            assert!(
                (mean - expect).abs() < 4.0 * se,
                "W={w}: mean {mean}, expect {expect}, se {se}"
            );
        }
    }

    #[test]
    fn real_field_matches_complex_second_moment() {
        let w = 2;
        let (mean, se) = second_moment(4000, |s| sample_ginibre_real(w, s).unwrap(), |m| m[(1, 0)]);
        assert!((mean - 0.5).abs() < 4.0 * se, "mean {mean}, se {se}");
        let m = sample_ginibre_real(3, &RngStream::new(2)).unwrap();
        assert!(m.data().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn gue_is_exactly_hermitian_with_real_diagonal() {
        let v = sample_gue(6, &RngStream::new(31)).unwrap();
        assert_eq!(v.hermitian_defect(), 0.0);
        for i in 0..6 {
            assert_eq!(v[(i, i)].im, 0.0);
        }
    }

    #[test]
    fn gue_moments_match_their_normalization() {
        let w = 4;
        let (mean_off, se_off) = second_moment(4000, |s| sample_gue(w, s).unwrap(), |m| m[(0, 3)]);
        let expect = 1.0 / (2.0 * w as f64);
        assert!(
            (mean_off - expect).abs() < 4.0 * se_off,
            "off-diagonal mean {mean_off}, expect {expect}"
        );
        let (mean_diag, se_diag) =
            second_moment(4000, |s| sample_gue(w, s).unwrap(), |m| m[(2, 2)]);
        assert!(
            (mean_diag - expect).abs() < 4.0 * se_diag,
            "diagonal mean {mean_diag}, expect {expect}"
        );
    }

    #[test]
    fn gue_spectral_radius_approaches_sqrt_two() {
        // Semicircle edge for this normalization; 10% tolerance absorbs the
        // finite-width edge deficit at W = 64.
        let v = sample_gue(64, &RngStream::new(7)).unwrap();
        let radius = spectral_norm(&v);
        assert!(
            (radius - 2f64.sqrt()).abs() < 0.1 * 2f64.sqrt(),
            "radius {radius}"
        );
    }
}
