//! Group elements and samplers for `S_n` and `U(n)`.
//!
//! Two families of samplers live here: Haar samplers (uniform permutations,
//! Haar unitaries) and the step laws `Y` that drive the random walks (the lazy
//! random transposition on `S_n`, the random reflection on `U(n)`). Both step
//! laws are symmetric (`Y⁻¹ ~ Y`) and constant on conjugacy classes.

mod permutation;
mod step;
mod unitary;

pub use permutation::{factorial, Permutation};
pub use step::{sample_step, Element, FiniteStepLaw, StepDistribution};
pub use unitary::{
    sample_complex_sphere, sample_haar_unitary, sample_reflection_angle, sample_reflection_step,
    ReflectionStep, UnitaryMatrix, UNITARY_TOL,
};

use crate::Result;
use rand::seq::SliceRandom;
use rand::Rng;

/// Group operations shared by permutations and unitaries.
///
/// Composition is `self · other`: for permutations `(g1 ∘ g2)(i) = g1[g2[i]]`,
/// for unitaries the matrix product.
pub trait GroupElement: Clone {
    fn degree(&self) -> usize;
    fn compose(&self, other: &Self) -> Result<Self>;
    fn invert(&self) -> Self;
    /// Identity of the same group.
    fn identity_like(&self) -> Self;
}

/// Uniform random permutation of `{0, …, n−1}` (Fisher–Yates).
pub fn sample_haar_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Permutation> {
    if n == 0 {
        return Err(crate::Error::invalid("permutation degree must be positive"));
    }
    let mut map: Vec<usize> = (0..n).collect();
    map.shuffle(rng);
    Ok(Permutation::from_map_unchecked(map))
}
