//! Reproducible random streams.
//!
//! Every stochastic routine in this crate draws from an [`RngStream`], a
//! ChaCha8 generator addressed by `(master_seed, stream_index)`. Distinct
//! stream indices under one master seed give statistically independent
//! sequences, and a stream is reachable directly without generating its
//! predecessors, so parallel drivers can hand stream `i` to worker `j` and
//! still produce output identical to a serial run.
//!
//! Callers that spawn substreams must keep their index ranges disjoint.
//! The scan drivers encode `(cell, sample)` as `cell * 2^32 + sample`, which
//! is safe for fewer than 2^32 samples per cell.

use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Address of one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
}

impl RngStream {
    /// Stream 0 under the given master seed.
    pub fn new(master_seed: u64) -> Self {
        Self::with_index(master_seed, 0)
    }

    /// An explicitly indexed stream under the given master seed.
    pub fn with_index(master_seed: u64, stream_index: u64) -> Self {
        RngStream {
            master_seed,
            stream_index,
        }
    }

    /// The stream whose index is offset by `offset` from this one.
    pub fn substream(&self, offset: u64) -> Self {
        RngStream {
            master_seed: self.master_seed,
            stream_index: self.stream_index.wrapping_add(offset),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// A Gaussian source positioned at the start of this stream.
    pub fn gaussian(&self) -> GaussianSource {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        GaussianSource { rng, spare: None }
    }
}

/// Standard normal generator over one ChaCha8 stream.
///
/// Uses the Marsaglia polar method; the rejected-pair loop consumes a
/// variable number of words, but the sequence is a pure function of the
/// stream address, which is all reproducibility needs.
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    /// Uniform in `[0, 1)` with 53 random bits.
    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One draw from N(0, 1).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        loop {
            let u = 2.0 * self.unit() - 1.0;
            let v = 2.0 * self.unit() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * Float::ln(s) / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}
