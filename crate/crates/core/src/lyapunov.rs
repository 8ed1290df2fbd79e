//! Lyapunov spectra of products of random blocks, estimated by QR
//! accumulation, with the closed forms they converge to.
//!
//! For products of iid real Gaussian matrices with entry variance `1/W`,
//! the exponents are exactly
//!
//! ```text
//! gamma_k = log(1/sqrt(W)) + (1/2) [ log 2 + psi((W - k + 1) / 2) ],   k = 1..W
//! ```
//!
//! ([`newman_exponent`]; psi is the digamma function). For iid complex
//! Ginibre factors with `E|a|^2 = 1/W` the analogous closed form is
//!
//! ```text
//! gamma_k = (1/2) [ psi(W - k + 1) - log W ]
//! ```
//!
//! ([`complex_ginibre_exponent`]). The two ensembles share every second
//! moment but not their Lyapunov spectra; at `W = 1` the values are
//! `-0.6351814...` and `-0.2886078...` respectively. Estimators here are
//! field-agnostic; pick the reference formula matching the field you
//! sample.
//!
//! Estimation follows the standard cocycle recursion: keep an orthonormal
//! frame `Q`, push it through each factor, re-orthonormalize with a
//! positive-diagonal QR, and average the log diagonal of `R`. The sum of
//! all exponents then telescopes to the mean log determinant of a factor,
//! which the tests check against an independent LU determinant.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::linalg::qr_positive;
use crate::mat::ComplexMatrix;
use crate::resolvent::{dagger_inverse_with_cap, DEFAULT_CONDITION_CAP};
use crate::rng::RngStream;
use crate::sampling::{self, EntryField};
use crate::Result;

pub const EULER_MASCHERONI: f64 = 0.5772156649015328606065120900824024;

/// `psi(twice_x / 2)`: the digamma function at integer or half-integer
/// points, by recurrence from `psi(1) = -gamma` and
/// `psi(1/2) = -gamma - 2 log 2`. Non-positive arguments are poles.
pub fn digamma_half_integer(twice_x: u64) -> Result<f64> {
    if twice_x == 0 {
        return Err(Error::DigammaPole);
    }
    if twice_x.is_multiple_of(2) {
        let m = twice_x / 2;
        let mut psi = -EULER_MASCHERONI;
        for i in 1..m {
            psi += 1.0 / i as f64;
        }
        Ok(psi)
    } else {
        let m = (twice_x - 1) / 2;
        let mut psi = -EULER_MASCHERONI - 2.0 * core::f64::consts::LN_2;
        for i in 1..=m {
            psi += 2.0 / (2 * i - 1) as f64;
        }
        Ok(psi)
    }
}

fn check_spectrum_index(width: usize, k: usize) -> Result<()> {
    if width == 0 {
        return Err(Error::InvalidDimension("zero width".into()));
    }
    if !(1..=width).contains(&k) {
        return Err(Error::IndexOutOfRange(format!(
            "Lyapunov index k = {k} outside 1..={width}"
        )));
    }
    Ok(())
}

/// Exact `gamma_k` for products of real Gaussian factors with entry
/// variance `1/W`.
pub fn newman_exponent(width: usize, k: usize) -> Result<f64> {
    check_spectrum_index(width, k)?;
    let psi = digamma_half_integer((width - k + 1) as u64)?;
    Ok(-0.5 * (width as f64).ln() + 0.5 * (core::f64::consts::LN_2 + psi))
}

/// Large-width form of the top of the spectrum: `gamma_k ~ -k / (2W)`.
pub fn newman_asymptotic(width: usize, k: usize) -> Result<f64> {
    check_spectrum_index(width, k)?;
    Ok(-(k as f64) / (2.0 * width as f64))
}

/// Exact `gamma_k` for products of complex Ginibre factors with
/// `E|a|^2 = 1/W`.
pub fn complex_ginibre_exponent(width: usize, k: usize) -> Result<f64> {
    check_spectrum_index(width, k)?;
    let psi = digamma_half_integer(2 * (width - k + 1) as u64)?;
    Ok(0.5 * (psi - (width as f64).ln()))
}

/// Exact top exponent of a single-factor product in the given field.
pub fn top_exponent(width: usize, field: EntryField) -> Result<f64> {
    match field {
        EntryField::Real => newman_exponent(width, 1),
        EntryField::Complex => complex_ginibre_exponent(width, 1),
    }
}

/// Reference decay rate per chain site of the zero-energy corner norm of
/// the chiral model: `log ||G_1n(0)||` falls like `-rate * n`.
///
/// One Gaussian bond appears every two sites, so the rate is half the top
/// exponent of the single-factor product; this is the only place that
/// factor of two lives.
pub fn corner_decay_rate(width: usize, field: EntryField) -> Result<f64> {
    Ok(-top_exponent(width, field)? / 2.0)
}

/// One QR cocycle step: factorizes `M Q = Q' R` with the positive-diagonal
/// convention and returns `Q'` and the log diagonal of `R`.
pub fn qr_step(q: &ComplexMatrix, m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    if !q.is_square() || !m.is_square() || q.rows() != m.rows() {
        return Err(Error::InvalidDimension(format!(
            "QR step needs equal square matrices, got {}x{} and {}x{}",
            m.rows(),
            m.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let (q_next, r) = qr_positive(&(m * q))?;
    let logs = (0..r.rows()).map(|k| r[(k, k)].re.ln()).collect();
    Ok((q_next, logs))
}

/// What multiplies the frame at each step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorKind {
    /// One iid Gaussian block per step.
    Ginibre,
    /// `(c T_odd)^{-1*} T_even`: the two-bond transfer factor of the chiral
    /// chain, odd bond scaled by `c`. Scaling shifts every exponent by
    /// exactly `-log c`.
    Pair { odd_scale: f64 },
}

/// Deterministic factor source: factor `i` is drawn from substream `i`,
/// so a run is reproducible and restartable at any index.
#[derive(Debug, Clone)]
pub struct FactorGenerator {
    kind: FactorKind,
    width: usize,
    field: EntryField,
    stream: RngStream,
    condition_cap: f64,
}

impl FactorGenerator {
    pub fn new(
        kind: FactorKind,
        width: usize,
        field: EntryField,
        stream: RngStream,
    ) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidDimension("zero width".into()));
        }
        if let FactorKind::Pair { odd_scale } = kind {
            if !(odd_scale.is_finite() && odd_scale > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "odd bond scale must be positive and finite, got {odd_scale}"
                )));
            }
        }
        Ok(FactorGenerator {
            kind,
            width,
            field,
            stream,
            condition_cap: DEFAULT_CONDITION_CAP,
        })
    }

    pub fn with_condition_cap(mut self, cap: f64) -> Self {
        self.condition_cap = cap;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn field(&self) -> EntryField {
        self.field
    }

    /// The `index`-th factor. Pair factors draw the odd bond first, and
    /// their inversion can fail under the condition cap, which the
    /// estimator counts against its failure budget.
    pub fn factor(&self, index: u64) -> Result<ComplexMatrix> {
        let sub = self.stream.substream(index);
        match self.kind {
            FactorKind::Ginibre => sampling::sample_hopping(self.field, self.width, &sub),
            FactorKind::Pair { odd_scale } => {
                let mut g = sub.gaussian();
                let t_odd = sampling::hopping_with(self.field, &mut g, self.width)?
                    .scale(Complex64::new(odd_scale, 0.0));
                let t_even = sampling::hopping_with(self.field, &mut g, self.width)?;
                let left = dagger_inverse_with_cap(&t_odd, self.condition_cap)?;
                Ok(&left * &t_even)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LyapunovEstimate {
    pub width: usize,
    /// Estimates sorted descending.
    pub gamma: Vec<f64>,
    /// Batch-mean standard errors, permuted alongside `gamma`.
    pub std_error: Vec<f64>,
    pub steps: u64,
    pub burn_in: u64,
    /// Adjacent estimates out of descending order before sorting; more than
    /// a few signals the run was too short for the gaps it tried to resolve.
    pub order_violations: u64,
    /// Factor draws rejected (singular or over the condition cap).
    pub factor_failures: u64,
}

/// Tracks rejected draws against the 1% failure budget. The grace of 3
/// keeps an unlucky early draw from aborting a long run.
#[derive(Default)]
struct FailureBudget {
    attempts: u64,
    failures: u64,
}

impl FailureBudget {
    fn record_failure(&mut self) -> Result<()> {
        self.failures += 1;
        if self.failures >= 3 && self.failures * 100 > self.attempts {
            return Err(Error::TooManyFailures {
                failed: self.failures,
                attempted: self.attempts,
            });
        }
        Ok(())
    }
}

fn next_factor(
    gen: &FactorGenerator,
    budget: &mut FailureBudget,
    index: &mut u64,
) -> Result<ComplexMatrix> {
    loop {
        let i = *index;
        *index += 1;
        budget.attempts += 1;
        match gen.factor(i) {
            Ok(m) => return Ok(m),
            Err(e) if e.is_usage() => return Err(e),
            Err(_) => budget.record_failure()?,
        }
    }
}

/// Runs the QR cocycle for `burn_in + steps` accepted factors and averages
/// log diagonals over the `steps` kept ones.
///
/// Standard errors come from batch means with batch length
/// `floor(sqrt(steps))`; steps beyond the last full batch still enter the
/// point estimate. Factor failures are skipped and counted, and more than
/// 1% of draws failing aborts with [`Error::TooManyFailures`].
pub fn estimate_lyapunov(
    gen: &FactorGenerator,
    steps: u64,
    burn_in: u64,
) -> Result<LyapunovEstimate> {
    if steps < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 steps for batch statistics, got {steps}"
        )));
    }
    let w = gen.width();
    let batch_len = {
        let mut b = 1u64;
        while (b + 1) * (b + 1) <= steps {
            b += 1;
        }
        b
    };
    let n_batches = steps / batch_len;

    let mut budget = FailureBudget::default();
    let mut index = 0u64;

    let mut q = ComplexMatrix::identity(w);
    let mut done = 0u64;
    while done < burn_in {
        let m = next_factor(gen, &mut budget, &mut index)?;
        match qr_step(&q, &m) {
            Ok((q_next, _)) => {
                q = q_next;
                done += 1;
            }
            Err(e) if e.is_usage() => return Err(e),
            Err(_) => budget.record_failure()?,
        }
    }

    let mut sums = vec![0.0f64; w];
    let mut batch_acc = vec![0.0f64; w];
    let mut batch_means: Vec<Vec<f64>> = vec![Vec::with_capacity(n_batches as usize); w];
    let mut kept = 0u64;
    while kept < steps {
        let m = next_factor(gen, &mut budget, &mut index)?;
        match qr_step(&q, &m) {
            Ok((q_next, logs)) => {
                q = q_next;
                for k in 0..w {
                    sums[k] += logs[k];
                    batch_acc[k] += logs[k];
                }
                kept += 1;
                if kept.is_multiple_of(batch_len) && (kept / batch_len) <= n_batches {
                    for k in 0..w {
                        batch_means[k].push(batch_acc[k] / batch_len as f64);
                        batch_acc[k] = 0.0;
                    }
                }
            }
            Err(e) if e.is_usage() => return Err(e),
            Err(_) => budget.record_failure()?,
        }
    }
    let failures = budget.failures;

    let gamma_raw: Vec<f64> = sums.iter().map(|s| s / steps as f64).collect();
    let std_error_raw: Vec<f64> = batch_means
        .iter()
        .map(|means| {
            let nb = means.len() as f64;
            let mean: f64 = means.iter().sum::<f64>() / nb;
            let var: f64 = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (nb - 1.0);
            (var / nb).sqrt()
        })
        .collect();

    let order_violations = gamma_raw.windows(2).filter(|p| p[0] < p[1]).count() as u64;
    let mut order: Vec<usize> = (0..w).collect();
    order.sort_by(|&a, &b| {
        gamma_raw[b]
            .partial_cmp(&gamma_raw[a])
            .expect("estimates are finite")
    });
    let gamma = order.iter().map(|&i| gamma_raw[i]).collect();
    let std_error = order.iter().map(|&i| std_error_raw[i]).collect();

    Ok(LyapunovEstimate {
        width: w,
        gamma,
        std_error,
        steps,
        burn_in,
        order_violations,
        factor_failures: failures,
    })
}
