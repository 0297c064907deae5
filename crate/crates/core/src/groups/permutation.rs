use super::GroupElement;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest degree whose factorial fits in a `u64`.
const MAX_RANKABLE: usize = 20;

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// A permutation of `{0, …, n−1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::invalid(format!("{map:?} is not a bijection of 0..{n}")));
            }
        }
        Ok(Permutation { map })
    }

    pub(crate) fn from_map_unchecked(map: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(map.clone()).is_ok());
        Permutation { map }
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// The transposition `(i j)`; the identity when `i == j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::invalid(format!("transposition ({i} {j}) out of range for degree {n}")));
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(i, j);
        Ok(Permutation { map })
    }

    /// The cycle sending `points[0] → points[1] → … → points[0]`.
    pub fn cycle(n: usize, points: &[usize]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        for (k, &p) in points.iter().enumerate() {
            if p >= n {
                return Err(Error::invalid(format!("cycle point {p} out of range for degree {n}")));
            }
            map[p] = points[(k + 1) % points.len()];
        }
        Permutation::new(map)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn fixed_points(&self) -> usize {
        self.map.iter().enumerate().filter(|&(i, &x)| i == x).count()
    }

    /// Rank in lexicographic order (identity is 0), via the Lehmer code.
    pub fn lehmer_rank(&self) -> u64 {
        let n = self.map.len();
        assert!(n <= MAX_RANKABLE, "degree {n} too large to rank");
        let mut rank = 0u64;
        for i in 0..n {
            let smaller_after = self.map[i + 1..].iter().filter(|&&x| x < self.map[i]).count();
            rank = rank * (n - i) as u64 + smaller_after as u64;
        }
        rank
    }

    pub fn from_lehmer_rank(n: usize, rank: u64) -> Result<Self> {
        if n > MAX_RANKABLE {
            return Err(Error::TooLarge { n, max: MAX_RANKABLE });
        }
        if rank >= factorial(n) {
            return Err(Error::invalid(format!("rank {rank} out of range for degree {n}")));
        }
        let mut digits = vec![0usize; n];
        let mut r = rank;
        for i in (0..n).rev() {
            let base = (n - i) as u64;
            digits[i] = (r % base) as usize;
            r /= base;
        }
        let mut remaining: Vec<usize> = (0..n).collect();
        let map = digits.into_iter().map(|d| remaining.remove(d)).collect();
        Ok(Permutation { map })
    }
}

impl GroupElement for Permutation {
    fn degree(&self) -> usize {
        self.map.len()
    }

    fn compose(&self, other: &Self) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DimensionMismatch {
                expected: self.degree(),
                found: other.degree(),
            });
        }
        Ok(Permutation {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    fn invert(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    fn identity_like(&self) -> Self {
        Permutation::identity(self.degree())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::new(vec![1, 0, 2]).is_ok());
    }

    #[test]
    fn swap_is_an_involution() {
        let s = Permutation::transposition(2, 0, 1).unwrap();
        assert!(s.compose(&s).unwrap().is_identity());
    }

    #[test]
    fn three_cycle_squared() {
        let c = Permutation::cycle(3, &[0, 1, 2]).unwrap();
        let expected = Permutation::cycle(3, &[0, 2, 1]).unwrap();
        assert_eq!(c.compose(&c).unwrap(), expected);
        assert_eq!(c.invert(), expected);
    }

    #[test]
    fn identity_inverse() {
        let id = Permutation::identity(5);
        assert_eq!(id.invert(), id);
    }

    #[test]
    fn compose_mismatch() {
        let a = Permutation::identity(3);
        let b = Permutation::identity(4);
        assert!(matches!(a.compose(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn lehmer_round_trip_s5() {
        let mut last = None;
        for r in 0..factorial(5) {
            let p = Permutation::from_lehmer_rank(5, r).unwrap();
            assert_eq!(p.lehmer_rank(), r);
            if let Some(prev) = last {
                assert!(prev < p, "lexicographic order");
            }
            last = Some(p);
        }
        assert!(Permutation::from_lehmer_rank(5, 120).is_err());
        assert_eq!(Permutation::identity(6).lehmer_rank(), 0);
    }
}
