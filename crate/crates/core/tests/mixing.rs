use haar_concentration::groups::StepDistribution;
use haar_concentration::mixing::{
    exact_tv_curve, fit_decay, porod_bound, porod_decay_params, unitary_mixing_diagnostic, TvCurve, DEFAULT_FLOOR,
};

fn lazy(n: usize) -> StepDistribution {
    StepDistribution::LazyTransposition { n }
}

#[test]
fn s3_first_step_is_one_third() {
    let c = exact_tv_curve(3, &lazy(3), 5).unwrap();
    assert!((c.value(1) - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn curves_are_non_increasing() {
    for n in 3..=6 {
        let c = exact_tv_curve(n, &lazy(n), 30 * n).unwrap();
        // rounding noise once the curve reaches ~1e-16
        assert!(c.is_non_increasing(1e-15), "n = {n}");
    }
}

#[test]
fn lazy_walk_rate_matches_second_eigenvalue() {
    // λ* = (n−2)/n governs the tail of the curve
    for n in 4..=6 {
        let fit = fit_decay(&exact_tv_curve(n, &lazy(n), 40 * n).unwrap(), DEFAULT_FLOOR).unwrap();
        let want = -((n as f64 - 2.0) / n as f64).ln();
        assert!((fit.b - want).abs() / want < 0.05, "n = {n}: b = {} vs {want}", fit.b);
    }
}

#[test]
fn cutoff_at_six() {
    let k = (6.0f64 * 6f64.ln()).ceil() as usize;
    let c = exact_tv_curve(6, &lazy(6), k).unwrap();
    assert!(c.value(k) < 0.5);
}

#[test]
fn synthetic_fit() {
    let values = (0..60).map(|k| 0.8 * (-0.7 * k as f64).exp()).collect();
    let fit = fit_decay(&TvCurve { values }, 1e-15).unwrap();
    assert!((fit.b - 0.7).abs() < 1e-9);
    assert!((fit.a - 0.8).abs() < 1e-9);
}

#[test]
fn envelope_dominates_every_certified_point() {
    for n in 3..=6 {
        let c = exact_tv_curve(n, &lazy(n), 40 * n).unwrap();
        let fit = fit_decay(&c, DEFAULT_FLOOR).unwrap();
        assert!(fit.certified_through < c.k_max());
        for k in 0..=fit.certified_through {
            assert!(c.value(k) <= fit.envelope(k as f64), "n = {n}, k = {k}");
        }
    }
}

#[test]
fn porod_parameters() {
    let (a, b) = porod_decay_params(1.0, 2.0, 4).unwrap();
    assert_eq!((a, b), (4.0, 0.5));
    assert!((porod_bound(1.0, 2.0, 4, 2.0).unwrap() - 4.0 * (-1.0f64).exp()).abs() < 1e-15);
    assert!(porod_decay_params(0.0, 1.0, 3).is_err());
}

#[test]
fn unitary_proxy_approaches_haar_value() {
    let d = unitary_mixing_diagnostic(3, 30, 2000, 11).unwrap();
    assert_eq!(d.points[0].mean, 9.0);
    let last = d.points.last().unwrap();
    assert!(last.deviation <= 4.0 * last.stderr + 0.05, "{last:?}");
    assert!(d.label.starts_with("PROXY"));
}
