//! Numerical kernels for a laboratory of random band matrices with chiral
//! block structure.
//!
//! The crate covers four layers, each usable on its own:
//!
//! * [`rng`] and [`sampling`]: reproducible Gaussian ensembles (complex and
//!   real Ginibre hopping blocks, GUE potential blocks) addressed by
//!   `(master_seed, stream_index)` so parallel drivers can draw
//!   non-overlapping streams.
//! * [`mat`] and [`linalg`]: a small dense complex matrix type with the
//!   factorizations the model needs (partial-pivot LU, Householder QR with a
//!   positive-diagonal convention, one-sided Jacobi singular values).
//! * [`model`] and [`resolvent`]: block tridiagonal Hamiltonians, the chiral
//!   sublattice signature, Green's function blocks by dense solve or block
//!   forward elimination, and the closed-form corner block at zero energy.
//! * [`lyapunov`] and [`fit`]: QR-based Lyapunov spectrum estimation for
//!   products of random blocks, the exact digamma reference values, and the
//!   least squares fits used by decay and scaling experiments.
//!
//! Everything is deterministic given the seeds and does no IO. The crate
//! builds without `std` (with `alloc`); the `bandlab-cli` companion crate
//! carries file formats and the command line driver.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod fit;
pub mod linalg;
pub mod lyapunov;
pub mod mat;
pub mod model;
pub mod resolvent;
pub mod rng;
pub mod sampling;

pub use error::Error;
pub use mat::ComplexMatrix;
pub use rng::RngStream;

pub type Result<T> = core::result::Result<T, Error>;
