use super::{
    sample_reflection_step, GroupElement, Permutation, UnitaryMatrix,
};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A point of `S_n` or `U(n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Permutation(Permutation),
    Unitary(UnitaryMatrix),
}

impl Element {
    pub fn as_permutation(&self) -> Option<&Permutation> {
        match self {
            Element::Permutation(p) => Some(p),
            Element::Unitary(_) => None,
        }
    }

    pub fn as_unitary(&self) -> Option<&UnitaryMatrix> {
        match self {
            Element::Unitary(u) => Some(u),
            Element::Permutation(_) => None,
        }
    }
}

impl GroupElement for Element {
    fn degree(&self) -> usize {
        match self {
            Element::Permutation(p) => p.degree(),
            Element::Unitary(u) => u.degree(),
        }
    }

    fn compose(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (Element::Permutation(a), Element::Permutation(b)) => a.compose(b).map(Element::Permutation),
            (Element::Unitary(a), Element::Unitary(b)) => a.compose(b).map(Element::Unitary),
            _ => Err(Error::GroupMismatch),
        }
    }

    fn invert(&self) -> Self {
        match self {
            Element::Permutation(p) => Element::Permutation(p.invert()),
            Element::Unitary(u) => Element::Unitary(u.invert()),
        }
    }

    fn identity_like(&self) -> Self {
        match self {
            Element::Permutation(p) => Element::Permutation(p.identity_like()),
            Element::Unitary(u) => Element::Unitary(u.identity_like()),
        }
    }
}

/// Law of the walk step `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepDistribution {
    /// `I − (1 − e^{iφ}) u u*` on `U(n)`.
    UnitaryReflection { n: usize },
    /// `(i j)` with `i, j` independent uniform on `0..n`; identity when `i = j`.
    LazyTransposition { n: usize },
}

impl StepDistribution {
    pub fn degree(&self) -> usize {
        match *self {
            StepDistribution::UnitaryReflection { n } | StepDistribution::LazyTransposition { n } => n,
        }
    }

    /// The exact law as weighted support; only finite kinds have one.
    pub fn exact_law(&self) -> Result<FiniteStepLaw> {
        match *self {
            StepDistribution::LazyTransposition { n } => FiniteStepLaw::lazy_transposition(n),
            StepDistribution::UnitaryReflection { .. } => Err(Error::NonFiniteStep),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Element> {
        sample_step(self, rng)
    }
}

pub fn sample_step<R: Rng + ?Sized>(dist: &StepDistribution, rng: &mut R) -> Result<Element> {
    match *dist {
        StepDistribution::LazyTransposition { n } => {
            if n == 0 {
                return Err(Error::invalid("transposition degree must be positive"));
            }
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            Permutation::transposition(n, i, j).map(Element::Permutation)
        }
        StepDistribution::UnitaryReflection { n } => {
            sample_reflection_step(n, rng).map(|y| Element::Unitary(y.to_unitary()))
        }
    }
}

/// Finitely supported step law with integer weights over a common denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteStepLaw {
    n: usize,
    support: Vec<(Permutation, u64)>,
    denominator: u64,
}

impl FiniteStepLaw {
    /// Identity with weight `n`, each transposition `(i j)`, `i < j`, with
    /// weight 2, all over `n²`: masses `1/n` and `2/n²`.
    pub fn lazy_transposition(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("transposition degree must be positive"));
        }
        let mut support = vec![(Permutation::identity(n), n as u64)];
        for i in 0..n {
            for j in i + 1..n {
                support.push((Permutation::transposition(n, i, j)?, 2));
            }
        }
        Ok(FiniteStepLaw {
            n,
            support,
            denominator: (n * n) as u64,
        })
    }

    /// Build from explicit weights; duplicates are merged and weights must sum
    /// to `denominator`.
    pub fn from_weights(n: usize, weights: Vec<(Permutation, u64)>, denominator: u64) -> Result<Self> {
        let mut support: Vec<(Permutation, u64)> = Vec::new();
        for (p, w) in weights {
            if p.degree() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.degree(),
                });
            }
            match support.iter_mut().find(|(q, _)| *q == p) {
                Some(entry) => entry.1 += w,
                None if w > 0 => support.push((p, w)),
                None => {}
            }
        }
        let total: u64 = support.iter().map(|(_, w)| w).sum();
        if total != denominator || denominator == 0 {
            return Err(Error::invalid(format!("weights sum to {total}, expected {denominator}")));
        }
        Ok(FiniteStepLaw {
            n,
            support,
            denominator,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[(Permutation, u64)] {
        &self.support
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn weight(&self, g: &Permutation) -> u64 {
        self.support
            .iter()
            .find(|(p, _)| p == g)
            .map_or(0, |(_, w)| *w)
    }

    pub fn mass(&self, g: &Permutation) -> f64 {
        self.weight(g) as f64 / self.denominator as f64
    }

    /// `Y⁻¹ ~ Y`, exactly.
    pub fn is_symmetric(&self) -> bool {
        self.support.iter().all(|(p, w)| self.weight(&p.invert()) == *w)
    }

    /// `hYh⁻¹ ~ Y` for every `h` in `conjugators`, exactly.
    pub fn is_invariant_under_conjugation(&self, conjugators: &[Permutation]) -> bool {
        conjugators.iter().all(|h| {
            let h_inv = h.invert();
            self.support.iter().all(|(p, w)| {
                let conj = h.compose(p).and_then(|hp| hp.compose(&h_inv));
                conj.map_or(false, |c| self.weight(&c) == *w)
            })
        })
    }
}
