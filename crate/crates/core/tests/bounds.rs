use haar_concentration::bounds::{compute_c, implied_kappa, tail_bound, theorem1_bounds, BoundInputs};

/// Σ_{k=0}^{K} min{B², 4aAB e^{−bk}} for every K up to `k_max`, returning the largest.
fn partial_sum_oracle(a_sup: f64, b_step: f64, a: f64, b: f64, k_max: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..=k_max {
        let term = (b_step * b_step).min(4.0 * a * a_sup * b_step * (-b * k as f64).exp());
        s += term;
        if term < 1e-300 {
            break;
        }
    }
    s
}

#[test]
fn c_dominates_partial_sums_on_a_grid() {
    let mut checked = 0;
    let mut below_one = 0;
    for &a_sup in &[0.1, 1.0, 10.0] {
        for &frac in &[0.01, 0.5, 2.0] {
            let b_step = frac * a_sup;
            for &a in &[0.01, 0.3, 1.0, 20.0] {
                for &b in &[1e-3, 0.1, 1.0, 5.0] {
                    let inputs = BoundInputs::new(a_sup, b_step, a, b).unwrap();
                    let r = compute_c(&inputs);
                    if r.beta_ratio < 1.0 {
                        below_one += 1;
                    }
                    let s = partial_sum_oracle(a_sup, b_step, a, b, 1_000_000);
                    assert!(s <= r.c * (1.0 + 1e-10), "A={a_sup} B={b_step} a={a} b={b}: {s} > {}", r.c);
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 144);
    assert!(below_one > 0);
}

#[test]
fn tail_crossover() {
    for &c in &[0.1, 1.0, 7.5] {
        let t = (c * 2f64.ln()).sqrt();
        assert!((tail_bound(c, t).unwrap() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn spectral_tail_is_general_tail() {
    for n in [4usize, 16, 100] {
        for &kappa in &[0.5, 1.0, 3.0] {
            for &t in &[0.0, 0.05, 0.3] {
                let s = theorem1_bounds(n, kappa, t).unwrap();
                let c = 2.0 * kappa * (n as f64).ln() / n as f64;
                assert_eq!(s.tail, tail_bound(c, t).unwrap());
                assert!((implied_kappa(n, c).unwrap() - kappa).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn c_is_monotone() {
    let base = compute_c(&BoundInputs::new(1.0, 0.4, 2.0, 0.3).unwrap()).c;
    assert!(compute_c(&BoundInputs::new(2.0, 0.4, 2.0, 0.3).unwrap()).c >= base);
    assert!(compute_c(&BoundInputs::new(1.0, 0.4, 3.0, 0.3).unwrap()).c >= base);
    assert!(compute_c(&BoundInputs::new(1.0, 0.4, 2.0, 0.6).unwrap()).c <= base);
}

#[test]
fn unit_example() {
    let r = compute_c(&BoundInputs::new(1.0, 1.0, 1.0, 1.0).unwrap());
    assert!((r.c - 2.96827).abs() < 1e-5);
    assert!((r.variance_bound - 1.48414).abs() < 1e-5);
}
