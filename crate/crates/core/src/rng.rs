//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`] obtained by
//! [`stream`], which mixes a master seed, a label naming the pipeline stage, and
//! a task index. Tasks therefore never share a stream, and a replicate's draws
//! do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Stable 64-bit child seed for `(master, label, index)`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let s = splitmix64(master);
    let s = splitmix64(s ^ fnv1a(label));
    splitmix64(s ^ index)
}

pub fn stream(master: u64, label: &str, index: u64) -> Stream {
    Stream::seed_from_u64(derive_seed(master, label, index))
}
