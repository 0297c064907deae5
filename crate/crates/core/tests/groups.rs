use haar_concentration::groups::{
    factorial, sample_complex_sphere, sample_haar_permutation, sample_haar_unitary, sample_reflection_angle,
    sample_reflection_step, FiniteStepLaw, GroupElement, Permutation, ReflectionStep, StepDistribution,
};
use haar_concentration::rng::stream;
use haar_concentration::stats::Summary;
use haar_concentration::C64;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

proptest! {
    #[test]
    fn lehmer_rank_round_trips(n in 1usize..8, seed in any::<u64>()) {
        let mut s = stream(seed, "lehmer", 0);
        let p = sample_haar_permutation(n, &mut s).unwrap();
        let r = p.lehmer_rank();
        prop_assert!(r < factorial(n));
        prop_assert_eq!(Permutation::from_lehmer_rank(n, r).unwrap(), p);
    }

    #[test]
    fn permutation_group_laws(n in 1usize..9, seed in any::<u64>()) {
        let mut s = stream(seed, "perm-laws", 0);
        let a = sample_haar_permutation(n, &mut s).unwrap();
        let b = sample_haar_permutation(n, &mut s).unwrap();
        let c = sample_haar_permutation(n, &mut s).unwrap();
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert!(a.compose(&a.invert()).unwrap().is_identity());
        prop_assert_eq!(a.compose(&a.identity_like()).unwrap(), a);
    }

    #[test]
    fn haar_unitary_is_unitary(n in 1usize..12, seed in any::<u64>()) {
        let mut s = stream(seed, "unitary", 0);
        let u = sample_haar_unitary(n, &mut s).unwrap();
        prop_assert!(u.defect() <= 1e-12);
        let det = u.matrix().determinant();
        prop_assert!((det.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reflection_acts_on_its_axis_only(n in 1usize..10, seed in any::<u64>()) {
        let mut s = stream(seed, "reflection", 0);
        let y = sample_reflection_step(n, &mut s).unwrap();
        let ym = y.matrix();
        let u = y.axis().clone();
        prop_assert!((&ym * &u - &u * y.eigenphase()).norm() < 1e-12);
        // a vector orthogonal to u is fixed
        let w = sample_complex_sphere(n, &mut s).unwrap();
        let v = &w - &u * (u.adjoint() * &w)[(0, 0)];
        prop_assert!((&ym * &v - &v).norm() < 1e-12);
        prop_assert!(y.to_unitary().defect() < 1e-12);
        // Y·Y⁻¹ = I
        let prod = &ym * y.inverse().matrix();
        prop_assert!(max_abs(&(prod - DMatrix::identity(n, n))) < 1e-12);
    }

    #[test]
    fn left_multiply_matches_dense(n in 1usize..10, seed in any::<u64>()) {
        let mut s = stream(seed, "left-multiply", 0);
        let y = sample_reflection_step(n, &mut s).unwrap();
        let w = sample_haar_unitary(n, &mut s).unwrap();
        let fast = y.left_multiply(w.matrix());
        let dense = y.matrix() * w.matrix();
        prop_assert!(max_abs(&(fast - dense)) < 1e-12);
    }

    #[test]
    fn sphere_points_are_unit(n in 1usize..20, seed in any::<u64>()) {
        let mut s = stream(seed, "sphere", 0);
        let v = sample_complex_sphere(n, &mut s).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-13);
    }
}

#[test]
fn haar_fourth_trace_moment() {
    // E|Tr X|⁴ = 2 for n ≥ 2
    let reps = 20_000;
    let vals: Vec<f64> = (0..reps)
        .map(|r| {
            let mut s = stream(3, "moment4", r);
            sample_haar_unitary(4, &mut s).unwrap().trace().norm_sqr().powi(2)
        })
        .collect();
    let s = Summary::of(&vals);
    assert!((s.mean - 2.0).abs() <= 4.0 * s.mean_se, "{} ± {}", s.mean, s.mean_se);
}

#[test]
fn haar_entries_have_variance_one_over_n() {
    let n = 5;
    let vals: Vec<f64> = (0..10_000)
        .map(|r| {
            let mut s = stream(4, "entry", r);
            sample_haar_unitary(n, &mut s).unwrap().matrix()[(1, 3)].norm_sqr()
        })
        .collect();
    let s = Summary::of(&vals);
    assert!((s.mean - 1.0 / n as f64).abs() <= 4.0 * s.mean_se);
}

#[test]
fn reflection_angle_moment() {
    // cos²(φ/2) is Beta(1/2, n/2) distributed: mean 1/(n+1)
    let n = 4;
    let vals: Vec<f64> = (0..20_000)
        .map(|r| {
            let mut s = stream(5, "angle", r);
            (sample_reflection_angle(n, &mut s).unwrap() / 2.0).cos().powi(2)
        })
        .collect();
    let s = Summary::of(&vals);
    assert!((s.mean - 0.2).abs() <= 4.0 * s.mean_se, "{}", s.mean);
}

#[test]
fn reflection_steps_are_symmetric_in_law() {
    // Tr Y = n − 1 + e^{iφ}; symmetry forces E Im Tr Y = 0
    let vals: Vec<f64> = (0..10_000)
        .map(|r| {
            let mut s = stream(6, "symmetry", r);
            sample_reflection_step(3, &mut s).unwrap().to_unitary().trace().im
        })
        .collect();
    let s = Summary::of(&vals);
    assert!(s.mean.abs() <= 4.0 * s.mean_se);
}

#[test]
fn identity_reflection() {
    let y = ReflectionStep::identity(4).unwrap();
    assert_eq!(y.delta(), C64::new(0.0, 0.0));
    let w = DMatrix::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64));
    assert_eq!(y.left_multiply(&w), w);
    assert!(ReflectionStep::new(DVector::from_element(3, C64::new(1.0, 0.0)), 1.0).is_err());
}

#[test]
fn lazy_transposition_law() {
    for n in 2..=6 {
        let law = FiniteStepLaw::lazy_transposition(n).unwrap();
        let total: u64 = law.support().iter().map(|(_, w)| w).sum();
        assert_eq!(total, law.denominator());
        assert_eq!(law.mass(&Permutation::identity(n)), 1.0 / n as f64);
        assert_eq!(law.mass(&Permutation::transposition(n, 0, 1).unwrap()), 2.0 / (n * n) as f64);
        assert!(law.is_symmetric());
        let all: Vec<Permutation> = (0..factorial(n))
            .map(|r| Permutation::from_lehmer_rank(n, r).unwrap())
            .collect();
        assert!(law.is_invariant_under_conjugation(&all));
    }
}

#[test]
fn step_distribution_serde() {
    let d = StepDistribution::LazyTransposition { n: 5 };
    let text = serde_json::to_string(&d).unwrap();
    assert_eq!(text, r#"{"kind":"lazy_transposition","n":5}"#);
    assert_eq!(serde_json::from_str::<StepDistribution>(&text).unwrap(), d);
    assert!(StepDistribution::UnitaryReflection { n: 3 }.exact_law().is_err());
}
