//! The Markov kernel `Pf(x) = E f(Yx)` on a small symmetric group, exactly.
//!
//! States are the `n!` permutations indexed by Lehmer rank. The kernel is kept
//! as sparse integer weights over the step law's denominator, so stochasticity
//! and symmetry are checked in exact arithmetic; only function values are
//! floating point.
//!
//! The pair function `F(x, y) = Σₖ (Pᵏf(x) − Pᵏf(y))` is computed through the
//! potential `h = Σₖ Pᵏf`, so that `F(x, y) = h(x) − h(y)`.

use crate::groups::{factorial, FiniteStepLaw, GroupElement, Permutation, StepDistribution};
use crate::{par, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Largest degree handled by the exact machinery (`7! = 5040` states).
pub const MAX_EXACT_DEGREE: usize = 7;
/// Iteration cap for the series defining the potential.
pub const MAX_SERIES_TERMS: usize = 1_000_000;
/// Default truncation tolerance for [`ExactKernel::potential`].
pub const DEFAULT_SERIES_EPS: f64 = 1e-13;

const CENTERING_TOL: f64 = 1e-12;

/// All of `S_n`, enumerated in lexicographic (Lehmer-rank) order.
#[derive(Clone, Debug)]
pub struct FiniteGroupTable {
    n: usize,
    elements: Vec<Permutation>,
}

impl FiniteGroupTable {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("degree must be positive"));
        }
        if n > MAX_EXACT_DEGREE {
            return Err(Error::TooLarge {
                n,
                max: MAX_EXACT_DEGREE,
            });
        }
        let elements = (0..factorial(n))
            .map(|r| Permutation::from_lehmer_rank(n, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteGroupTable { n, elements })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> &Permutation {
        &self.elements[index]
    }

    pub fn index_of(&self, p: &Permutation) -> usize {
        debug_assert_eq!(p.degree(), self.n);
        p.lehmer_rank() as usize
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    /// `index(s ∘ x)` for every state `x`.
    pub fn left_action(&self, s: &Permutation) -> Result<Vec<usize>> {
        self.elements
            .iter()
            .map(|x| s.compose(x).map(|sx| self.index_of(&sx)))
            .collect()
    }

    /// Evaluate a function of permutations at every state.
    pub fn tabulate<F: Fn(&Permutation) -> f64>(&self, f: F) -> Vec<f64> {
        self.elements.iter().map(f).collect()
    }
}

/// Row-stochastic kernel `K(x, z) = P(Y = z x⁻¹)`.
#[derive(Clone, Debug)]
pub struct ExactKernel {
    table: FiniteGroupTable,
    law: FiniteStepLaw,
    /// Per state, `(index(s∘x), weight)` sorted by column.
    rows: Vec<Vec<(usize, u64)>>,
}

pub fn build_exact_kernel(n: usize, step: &StepDistribution) -> Result<ExactKernel> {
    if step.degree() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: step.degree(),
        });
    }
    let law = step.exact_law()?;
    ExactKernel::from_law(FiniteGroupTable::new(n)?, law)
}

/// Truncated potential `h = Σ_{k<K} Pᵏf`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub values: Vec<f64>,
    /// Number of terms summed.
    pub terms: usize,
    /// `max_g |P^K f(g)|` at the stopping point.
    pub residual_sup: f64,
    /// Bound on `|F(x, y) − (h(x) − h(y))|` from a geometric tail at the last
    /// observed contraction ratio; infinite if no contraction was seen.
    pub tail_bound: f64,
}

impl Potential {
    pub fn pair(&self, x: usize, y: usize) -> f64 {
        self.values[x] - self.values[y]
    }
}

/// Residuals of the exchangeable-pair identities on a finite group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `max_x |E_Y F(x, Yx) − f(x)|`.
    pub stein_residual: f64,
    /// `|Var f − ½ E[(f(X₀) − f(X₁)) F(X₀, X₁)]|`.
    pub variance_residual: f64,
    pub variance: f64,
    pub pair_expectation: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

impl ExactKernel {
    pub fn from_law(table: FiniteGroupTable, law: FiniteStepLaw) -> Result<Self> {
        if law.degree() != table.degree() {
            return Err(Error::DimensionMismatch {
                expected: table.degree(),
                found: law.degree(),
            });
        }
        let size = table.len();
        let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::with_capacity(law.support().len()); size];
        for (s, w) in law.support() {
            for (x, z) in table.left_action(s)?.into_iter().enumerate() {
                rows[x].push((z, *w));
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(z, _)| z);
        }
        Ok(ExactKernel { table, law, rows })
    }

    pub fn table(&self) -> &FiniteGroupTable {
        &self.table
    }

    pub fn law(&self) -> &FiniteStepLaw {
        &self.law
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }

    pub fn denominator(&self) -> u64 {
        self.law.denominator()
    }

    pub fn row(&self, x: usize) -> &[(usize, u64)] {
        &self.rows[x]
    }

    pub fn weight(&self, x: usize, z: usize) -> u64 {
        let row = &self.rows[x];
        row.binary_search_by_key(&z, |&(c, _)| c)
            .map_or(0, |i| row[i].1)
    }

    pub fn entry(&self, x: usize, z: usize) -> f64 {
        self.weight(x, z) as f64 / self.denominator() as f64
    }

    /// Every row's integer weights sum to the denominator.
    pub fn rows_sum_to_one(&self) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().map(|&(_, w)| w).sum::<u64>() == self.denominator())
    }

    /// `K(x, z) = K(z, x)` for all pairs, compared as integers.
    pub fn is_symmetric(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(x, row)| row.iter().all(|&(z, w)| self.weight(z, x) == w))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size(), self.size());
        for (x, row) in self.rows.iter().enumerate() {
            for &(z, w) in row {
                m[(x, z)] = w as f64 / self.denominator() as f64;
            }
        }
        m
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                found: f.len(),
            });
        }
        Ok(())
    }

    fn apply_unchecked(&self, f: &[f64]) -> Vec<f64> {
        let denom = self.denominator() as f64;
        par::map_indexed(self.size(), |x| {
            self.rows[x].iter().map(|&(z, w)| w as f64 * f[z]).sum::<f64>() / denom
        })
    }

    /// `Pf`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        Ok(self.apply_unchecked(f))
    }

    /// `Pᵏf`; `k = 0` returns `f`.
    pub fn apply_kernel_power(&self, f: &[f64], k: usize) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let mut g = f.to_vec();
        for _ in 0..k {
            g = self.apply_unchecked(&g);
        }
        Ok(g)
    }

    fn check_centered(&self, f: &[f64]) -> Result<()> {
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        if mean.abs() > CENTERING_TOL * sup_norm(f).max(1.0) {
            return Err(Error::NotCentered { mean });
        }
        Ok(())
    }

    /// Sum `Pᵏf` until `max_g |Pᵏf(g)| < eps/2`.
    pub fn potential(&self, f: &[f64], eps: f64) -> Result<Potential> {
        self.check_len(f)?;
        self.check_centered(f)?;
        if !(eps > 0.0) {
            return Err(Error::invalid("series tolerance must be positive"));
        }
        let mut h = vec![0.0; f.len()];
        let mut g = f.to_vec();
        let mut terms = 0usize;
        let mut prev_norm = f64::NAN;
        let mut norm = sup_norm(&g);
        while norm >= eps / 2.0 {
            if terms == MAX_SERIES_TERMS {
                return Err(Error::NoConvergence(format!(
                    "kernel series after {MAX_SERIES_TERMS} terms (sup {norm:.3e})"
                )));
            }
            for (hi, gi) in h.iter_mut().zip(&g) {
                *hi += gi;
            }
            terms += 1;
            g = self.apply_unchecked(&g);
            prev_norm = norm;
            norm = sup_norm(&g);
        }
        let tail_bound = if norm == 0.0 {
            0.0
        } else {
            let ratio = norm / prev_norm;
            if ratio < 1.0 {
                2.0 * norm / (1.0 - ratio)
            } else {
                f64::INFINITY
            }
        };
        Ok(Potential {
            values: h,
            terms,
            residual_sup: norm,
            tail_bound,
        })
    }

    /// `F(x, y) = Σₖ (Pᵏf(x) − Pᵏf(y))`, truncated at tolerance `eps`.
    pub fn pair_function(&self, f: &[f64], x: usize, y: usize, eps: f64) -> Result<f64> {
        if x >= self.size() || y >= self.size() {
            return Err(Error::invalid(format!("state index out of range ({x}, {y})")));
        }
        Ok(self.potential(f, eps)?.pair(x, y))
    }

    /// Checks `E_Y F(x, Yx) = f(x)` pointwise and
    /// `Var f = ½ E[(f(X) − f(YX)) F(X, YX)]` under uniform `X`.
    pub fn check_identities(&self, f: &[f64], eps: f64) -> Result<IdentityReport> {
        let pot = self.potential(f, eps)?;
        let h = &pot.values;
        let denom = self.denominator() as f64;
        let size = self.size() as f64;

        let per_state: Vec<(f64, f64)> = par::map_indexed(self.size(), |x| {
            let row = &self.rows[x];
            let expected_pair: f64 = row.iter().map(|&(z, w)| w as f64 * (h[x] - h[z])).sum::<f64>() / denom;
            let dirichlet: f64 = row
                .iter()
                .map(|&(z, w)| w as f64 * (f[x] - f[z]) * (h[x] - h[z]))
                .sum::<f64>()
                / denom;
            ((expected_pair - f[x]).abs(), dirichlet)
        });
        let stein_residual = per_state.iter().fold(0.0f64, |a, &(r, _)| a.max(r));
        let pair_expectation = 0.5 * per_state.iter().map(|&(_, d)| d).sum::<f64>() / size;
        let variance = f.iter().map(|v| v * v).sum::<f64>() / size;
        Ok(IdentityReport {
            stein_residual,
            variance_residual: (variance - pair_expectation).abs(),
            variance,
            pair_expectation,
            terms: pot.terms,
            tail_bound: pot.tail_bound,
        })
    }

    /// `‖f‖_Y = max_x (E (f(x) − f(Yx))²)^{1/2}`, exactly.
    pub fn y_seminorm_exact(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        let denom = self.denominator() as f64;
        let worst = (0..self.size())
            .map(|x| {
                self.rows[x]
                    .iter()
                    .map(|&(z, w)| {
                        let d = f[x] - f[z];
                        w as f64 * d * d
                    })
                    .sum::<f64>()
                    / denom
            })
            .fold(0.0f64, f64::max);
        Ok(worst.sqrt())
    }
}

/// Subtract the uniform mean.
pub fn center(f: &[f64]) -> Vec<f64> {
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    f.iter().map(|v| v - mean).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lazy(n: usize) -> ExactKernel {
        build_exact_kernel(n, &StepDistribution::LazyTransposition { n }).unwrap()
    }

    #[test]
    fn s2_kernel_is_half_half() {
        let k = lazy(2);
        let d = k.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(d[(i, j)], 0.5);
            }
        }
    }

    #[test]
    fn stochastic_and_symmetric() {
        for n in 1..=6 {
            let k = lazy(n);
            assert!(k.rows_sum_to_one());
            assert!(k.is_symmetric());
        }
        let d = lazy(4).to_dense();
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn guards() {
        assert!(matches!(FiniteGroupTable::new(8), Err(Error::TooLarge { .. })));
        assert!(matches!(
            build_exact_kernel(3, &StepDistribution::UnitaryReflection { n: 3 }),
            Err(Error::NonFiniteStep)
        ));
        assert!(lazy(3).apply(&[0.0; 5]).is_err());
    }

    #[test]
    fn powers() {
        let k = lazy(3);
        let f: Vec<f64> = (0..6).map(|i| i as f64).collect();
        assert_eq!(k.apply_kernel_power(&f, 0).unwrap(), f);
        let c = vec![2.5; 6];
        let pc = k.apply_kernel_power(&c, 7).unwrap();
        assert!(pc.iter().all(|v| (v - 2.5).abs() < 1e-14));
        let mut ind = vec![0.0; 6];
        ind[k.table().identity_index()] = 1.0;
        let pf = k.apply(&ind).unwrap();
        assert!((pf[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pair_function_basics() {
        let k = lazy(4);
        let mut f = vec![0.0; 24];
        f[0] = 1.0;
        let f = center(&f);
        assert_eq!(k.pair_function(&f, 5, 5, 1e-13).unwrap(), 0.0);
        let a = k.pair_function(&f, 3, 17, 1e-13).unwrap();
        let b = k.pair_function(&f, 17, 3, 1e-13).unwrap();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn uncentered_rejected() {
        let k = lazy(3);
        assert!(matches!(k.potential(&[1.0; 6], 1e-12), Err(Error::NotCentered { .. })));
    }

    #[test]
    fn zero_function() {
        let k = lazy(4);
        let r = k.check_identities(&[0.0; 24], 1e-13).unwrap();
        assert_eq!(r.stein_residual, 0.0);
        assert_eq!(r.variance_residual, 0.0);
        assert_eq!(k.y_seminorm_exact(&[3.0; 24]).unwrap(), 0.0);
    }

    #[test]
    fn seminorm_on_s2() {
        let k = lazy(2);
        let s = k.y_seminorm_exact(&[1.0, -1.0]).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
