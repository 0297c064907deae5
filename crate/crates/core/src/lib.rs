//! Concentration of Haar measures through random-walk mixing.
//!
//! The crate has two halves. The exact half works on small symmetric groups
//! `S_n` (n ≤ 7): it enumerates every element, builds the Markov kernel of the
//! lazy random-transposition walk, and checks the exchangeable-pair identities
//! and the concentration constant with no sampling error. The Monte Carlo half
//! works on the unitary group `U(n)`: Haar sampling, the random-reflection walk,
//! and the empirical spectral distribution of `UMU* + VNV*`.
//!
//! Replicate loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise. Results do not depend on which path or
//! how many threads are used: every replicate draws from its own stream derived
//! from the master seed.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod groups;
pub mod hermitian;
pub mod kernel;
pub mod mixing;
pub mod par;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

/// Complex scalar used for all matrices.
pub type C64 = num_complex::Complex64;
