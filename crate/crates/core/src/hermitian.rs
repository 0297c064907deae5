//! Hermitian matrices and their empirical spectral distribution functions.
//!
//! `F_M(x) = #{λᵢ ≤ x} / n` is right-continuous. [`sup_cdf_distance`] is exact:
//! the difference of two such step functions is constant between consecutive
//! points of the merged spectrum, so its supremum is attained at one of them.

use crate::groups::{sample_complex_sphere, UnitaryMatrix};
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

/// Relative asymmetry accepted before hermitianizing.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative singular-value threshold for numeric rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: DMatrix<C64>,
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

impl HermitianMatrix {
    /// Accepts `m` if `‖M − M*‖_max ≤ HERMITIAN_TOL · max(1, ‖M‖_max)`, then
    /// stores `(M + M*)/2`, which is exactly hermitian.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let adj = m.adjoint();
        let deviation = max_abs(&(&m - &adj));
        if deviation > HERMITIAN_TOL * max_abs(&m).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianMatrix {
            m: (m + adj) * C64::new(0.5, 0.0),
        })
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermitianMatrix {
            m: DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) }),
        }
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// `‖M‖²_HS = Σ |m_ij|²`.
    pub fn hilbert_schmidt_sq(&self) -> f64 {
        self.m.norm_squared()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_same_order(self.order(), other.order())?;
        Ok(HermitianMatrix { m: &self.m + &other.m })
    }
}

fn check_same_order(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// Sorted spectrum of a hermitian matrix; the empirical distribution function.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCDF {
    eigenvalues: Vec<f64>,
}

impl SpectralCDF {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("eigenvalues must be finite"));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(SpectralCDF { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn count_at_most(&self, x: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l <= x)
    }

    pub fn value(&self, x: f64) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        self.count_at_most(x) as f64 / self.len() as f64
    }
}

const MAX_SWEEPS_PER_DIM: usize = 1000;

fn decompose(m: &HermitianMatrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    let n = m.order().max(1);
    SymmetricEigen::try_new(m.m.clone(), f64::EPSILON, MAX_SWEEPS_PER_DIM * n)
        .ok_or_else(|| Error::NoConvergence("hermitian eigensolver".into()))
}

/// Sorted eigenvalues (with multiplicity).
pub fn eigenvalues(m: &HermitianMatrix) -> Result<SpectralCDF> {
    if m.order() == 0 {
        return SpectralCDF::from_eigenvalues(Vec::new());
    }
    let eig = decompose(m)?;
    SpectralCDF::from_eigenvalues(eig.eigenvalues.iter().copied().collect())
}

/// Eigenvalues and eigenvectors (columns, unsorted order from the solver is
/// re-sorted to match the returned spectrum). Fails if the reconstruction
/// residual `‖MV − VΛ‖_max` exceeds `1e−8 · max(1, ‖M‖_max)`.
pub fn eigen_decomposition(m: &HermitianMatrix) -> Result<(SpectralCDF, DMatrix<C64>)> {
    let n = m.order();
    let eig = decompose(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let lambda = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) });
    let residual = max_abs(&(&m.m * &vectors - &vectors * lambda));
    if residual > 1e-8 * m.max_abs().max(1.0) {
        return Err(Error::NoConvergence(format!(
            "hermitian eigensolver (residual {residual:.3e})"
        )));
    }
    Ok((SpectralCDF::from_eigenvalues(values)?, vectors))
}

pub fn ecdf_value(s: &SpectralCDF, x: f64) -> f64 {
    s.value(x)
}

/// Exact `‖F₁ − F₂‖∞`, by a merged scan over both sorted spectra.
pub fn sup_cdf_distance(s1: &SpectralCDF, s2: &SpectralCDF) -> Result<f64> {
    check_same_order(s1.len(), s2.len())?;
    let (a, b) = (s1.eigenvalues(), s2.eigenvalues());
    let n = a.len();
    if n == 0 {
        return Ok(0.0);
    }
    let (mut i, mut j, mut best) = (0usize, 0usize, 0usize);
    while i < n || j < n {
        let p = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < n && a[i] <= p {
            i += 1;
        }
        while j < n && b[j] <= p {
            j += 1;
        }
        best = best.max(i.abs_diff(j));
    }
    Ok(best as f64 / n as f64)
}

/// Singular values of `m` above `tol · max(σ_max, 1)`.
pub fn numeric_rank(m: &DMatrix<C64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let sigma_max = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    let cut = tol * sigma_max.max(1.0);
    sv.iter().filter(|&&s| s > cut).count()
}

/// `rank(M − N)` with relative singular-value threshold `tol`.
pub fn rank_distance(m: &HermitianMatrix, n: &HermitianMatrix, tol: f64) -> Result<usize> {
    check_same_order(m.order(), n.order())?;
    Ok(numeric_rank(&(&m.m - &n.m), tol))
}

/// `U M U*`.
pub fn conjugate(u: &UnitaryMatrix, m: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_same_order(u.dim(), m.order())?;
    let um = u.matrix() * &m.m;
    HermitianMatrix::new(um * u.matrix().adjoint())
}

/// `U diag(d) U*` without forming the diagonal matrix.
pub fn conjugate_diagonal(u: &UnitaryMatrix, diag: &[f64]) -> Result<HermitianMatrix> {
    check_same_order(u.dim(), diag.len())?;
    let mut ud = u.matrix().clone();
    for (j, &d) in diag.iter().enumerate() {
        ud.column_mut(j).scale_mut(d);
    }
    HermitianMatrix::new(ud * u.matrix().adjoint())
}

/// `(G + G*)/2` for a complex Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let adj = g.adjoint();
    HermitianMatrix {
        m: (g + adj) * C64::new(0.5, 0.0),
    }
}

/// `Σᵢ sᵢ vᵢvᵢ*` over `r` random unit vectors with weights `|sᵢ| ∈ [0.5, 2]`
/// of random sign; rank exactly `r` almost surely.
pub fn random_low_rank_hermitian<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<HermitianMatrix> {
    if r > n {
        return Err(Error::invalid(format!("rank {r} exceeds order {n}")));
    }
    let mut m = DMatrix::<C64>::zeros(n, n);
    for _ in 0..r {
        let v = sample_complex_sphere(n, rng)?;
        let mut s: f64 = rng.random_range(0.5..2.0);
        if rng.random::<bool>() {
            s = -s;
        }
        m += (&v * v.adjoint()) * C64::new(s, 0.0);
    }
    HermitianMatrix::new(m)
}
