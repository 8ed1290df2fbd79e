//! Error type shared by all kernels.
//!
//! The split matters to callers: `InvalidArgument`, `InvalidDimension` and
//! `IndexOutOfRange` mean the request itself was malformed, while the
//! remaining variants report numerical failure on a well-formed request
//! (a singular draw, a shift too close to the spectrum, too many rejected
//! samples). Drivers map the two groups to different exit codes.

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A size or shape precondition failed.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// A value precondition failed (range, parity, emptiness).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A block or spectrum index outside the valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A matrix inversion hit a zero pivot or exceeded the condition cap.
    #[error("singular matrix: condition estimate {cond:.3e} exceeds cap {cap:.3e}")]
    SingularMatrix { cond: f64, cap: f64 },

    /// A shifted operator `H - z` is numerically singular, so the resolvent
    /// at this `z` is not computable.
    #[error("shift is numerically at the spectrum: condition estimate {cond:.3e}")]
    NearSpectrum { cond: f64 },

    /// A Monte Carlo routine rejected more draws than its failure budget
    /// allows; the surviving mean would be biased.
    #[error("too many failed samples: {failed} of {attempted}")]
    TooManyFailures { failed: u64, attempted: u64 },

    /// The digamma function was requested at a non-positive argument.
    #[error("digamma pole at non-positive half-integer")]
    DigammaPole,

    /// A least squares fit has too few points or no spread in the abscissa.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

impl Error {
    /// True when the error reports a malformed request rather than a
    /// numerical failure during computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidDimension(_) | Error::InvalidArgument(_) | Error::IndexOutOfRange(_)
        )
    }
}
