use super::GroupElement;
use crate::{Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

/// Max-entry tolerance on `U*U − I` for sampled unitaries.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<C64>,
}

impl UnitaryMatrix {
    /// Checked constructor: square and unitary to within [`UNITARY_TOL`].
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let deviation = unitarity_defect(&m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix { m })
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        UnitaryMatrix { m }
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `‖U*U − I‖_max`.
    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.m)
    }
}

fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

impl GroupElement for UnitaryMatrix {
    fn degree(&self) -> usize {
        self.dim()
    }

    fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(UnitaryMatrix { m: &self.m * &other.m })
    }

    fn invert(&self) -> Self {
        UnitaryMatrix { m: self.m.adjoint() }
    }

    fn identity_like(&self) -> Self {
        UnitaryMatrix::identity(self.dim())
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix, with the phases
/// of `R`'s diagonal moved into `Q` so that the factorization is unique.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::invalid("unitary dimension must be positive"));
    }
    let g = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        // A zero diagonal has probability zero; keep Q's column as is.
        if norm > 0.0 {
            let phase = rjj / norm;
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    debug_assert!(unitarity_defect(&q) <= UNITARY_TOL * (n as f64).max(1.0));
    Ok(UnitaryMatrix { m: q })
}

/// Uniform point on the unit sphere of `ℂⁿ`.
pub fn sample_complex_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DVector<C64>> {
    if n == 0 {
        return Err(Error::invalid("sphere dimension must be positive"));
    }
    loop {
        let v = DVector::from_fn(n, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-300 {
            return Ok(v / C64::new(norm, 0.0));
        }
    }
}

/// Angle on `[0, 2π)` with density proportional to `sin(φ/2)^(n−1)`.
///
/// The first coordinate of a uniform point on the real sphere `S^n ⊂ ℝ^(n+1)`
/// is `cos θ` with `θ` distributed as `sin^(n−1) θ` on `[0, π]`; return `2θ`.
pub fn sample_reflection_angle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("reflection dimension must be positive"));
    }
    loop {
        let mut first = 0.0f64;
        let mut norm_sq = 0.0f64;
        for i in 0..=n {
            let g: f64 = rng.sample(StandardNormal);
            if i == 0 {
                first = g;
            }
            norm_sq += g * g;
        }
        if norm_sq > 0.0 {
            let c = (first / norm_sq.sqrt()).clamp(-1.0, 1.0);
            let phi = 2.0 * c.acos();
            return Ok(if phi >= TAU { 0.0 } else { phi });
        }
    }
}

/// The random reflection `Y = I − (1 − e^{iφ}) u u*`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionStep {
    u: DVector<C64>,
    phi: f64,
}

impl ReflectionStep {
    pub fn new(u: DVector<C64>, phi: f64) -> Result<Self> {
        let norm = u.norm();
        if u.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("reflection axis must be a unit vector (norm {norm})")));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::invalid(format!("reflection angle {phi} outside [0, 2π)")));
        }
        Ok(ReflectionStep { u, phi })
    }

    /// `φ = 0`, i.e. `Y = I`.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("reflection dimension must be positive"));
        }
        let mut u = DVector::zeros(n);
        u[0] = C64::new(1.0, 0.0);
        Ok(ReflectionStep { u, phi: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn axis(&self) -> &DVector<C64> {
        &self.u
    }

    pub fn angle(&self) -> f64 {
        self.phi
    }

    /// `e^{iφ}`, the eigenvalue on the axis.
    pub fn eigenphase(&self) -> C64 {
        C64::from_polar(1.0, self.phi)
    }

    /// `δ = 1 − e^{iφ}`.
    pub fn delta(&self) -> C64 {
        C64::new(1.0, 0.0) - self.eigenphase()
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.dim();
        DMatrix::identity(n, n) - (&self.u * self.u.adjoint()) * self.delta()
    }

    pub fn to_unitary(&self) -> UnitaryMatrix {
        UnitaryMatrix::from_matrix_unchecked(self.matrix())
    }

    /// `Y⁻¹ = Y*`, the reflection with angle `2π − φ` about the same axis.
    pub fn inverse(&self) -> Self {
        let phi = if self.phi == 0.0 { 0.0 } else { TAU - self.phi };
        ReflectionStep {
            u: self.u.clone(),
            phi,
        }
    }

    /// `Y·W` in `O(n²)`: `W − δ u (u* W)`.
    pub fn left_multiply(&self, w: &DMatrix<C64>) -> DMatrix<C64> {
        let uw = self.u.adjoint() * w;
        w - (&self.u * uw) * self.delta()
    }
}

/// Draw `Y`: `u` uniform on the complex sphere, `φ` independent with density
/// `∝ sin(φ/2)^(n−1)`.
pub fn sample_reflection_step<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ReflectionStep> {
    let u = sample_complex_sphere(n, rng)?;
    let phi = sample_reflection_angle(n, rng)?;
    Ok(ReflectionStep { u, phi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn u1_is_the_circle() {
        let mut rng = stream(3, "u1", 0);
        for _ in 0..50 {
            let u = sample_haar_unitary(1, &mut rng).unwrap();
            assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_unitaries_are_unitary() {
        let mut rng = stream(5, "unit", 0);
        for n in [2, 5, 16, 64] {
            let u = sample_haar_unitary(n, &mut rng).unwrap();
            assert!(u.defect() <= UNITARY_TOL, "n={n} defect {}", u.defect());
            let back = u.compose(&u.invert()).unwrap();
            assert!(UnitaryMatrix::new(back.into_matrix()).is_ok());
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        let mut rng = stream(0, "z", 0);
        assert!(sample_haar_unitary(0, &mut rng).is_err());
        assert!(sample_reflection_step(0, &mut rng).is_err());
    }

    #[test]
    fn checked_constructor() {
        let mut m = DMatrix::<C64>::identity(3, 3);
        assert!(UnitaryMatrix::new(m.clone()).is_ok());
        m[(0, 1)] = C64::new(1e-6, 0.0);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn reflection_action() {
        let mut rng = stream(9, "refl", 0);
        let y = sample_reflection_step(6, &mut rng).unwrap();
        let m = y.matrix();
        let yu = &m * y.axis();
        assert!((yu - y.axis() * y.eigenphase()).norm() < 1e-12);
        // a vector orthogonal to u
        let w = sample_complex_sphere(6, &mut rng).unwrap();
        let proj = y.axis().adjoint() * &w;
        let w_perp = &w - y.axis() * proj[(0, 0)];
        assert!((&m * &w_perp - &w_perp).norm() < 1e-12);
        assert!((m.determinant() - y.eigenphase()).norm() < 1e-10);
    }

    #[test]
    fn left_multiply_matches_dense() {
        let mut rng = stream(11, "lm", 0);
        let y = sample_reflection_step(7, &mut rng).unwrap();
        let w = sample_haar_unitary(7, &mut rng).unwrap();
        let dense = y.matrix() * w.matrix();
        assert!((y.left_multiply(w.matrix()) - dense).norm() < 1e-12);
    }

    #[test]
    fn inverse_reflection() {
        let mut rng = stream(1, "inv", 0);
        let y = sample_reflection_step(5, &mut rng).unwrap();
        let prod = y.matrix() * y.inverse().matrix();
        assert!((prod - DMatrix::<C64>::identity(5, 5)).norm() < 1e-12);
        assert_eq!(ReflectionStep::identity(3).unwrap().inverse().angle(), 0.0);
    }

    #[test]
    fn angle_range() {
        let mut rng = stream(2, "ang", 0);
        for n in 1..6 {
            for _ in 0..1000 {
                let phi = sample_reflection_angle(n, &mut rng).unwrap();
                assert!((0.0..TAU).contains(&phi));
            }
        }
    }
}
