//! Exact certification of the concentration bound on `S_n`.
//!
//! Every hypothesis is computed without sampling error: `‖f‖∞` and `‖f‖_Y`
//! by enumeration, `(a, b)` from the exact TV curve. The resulting bounds
//! `Var f ≤ C/2` and `P(|f| ≥ t) ≤ 2e^{−t²/C}` must then hold.

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{environment, to_value, Curve, ExperimentReport, Verdict};
use crate::bounds::{compute_c, tail_bound, BoundInputs, BoundResult};
use crate::groups::StepDistribution;
use crate::kernel::{build_exact_kernel, center, ExactKernel};
use crate::mixing::{exact_tv_curve, fit_decay, DecayFit, TvCurve, DEFAULT_FLOOR};
use crate::stats::frequency;
use crate::{par, rng, Error, Result};
use rand::Rng;
use serde::Serialize;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCheck {
    pub t: f64,
    /// Exact `P(|f(X)| ≥ t)` under Haar measure.
    pub exact: f64,
    /// Frequency over the walk samples.
    pub empirical: f64,
    pub empirical_se: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionCertificate {
    pub label: String,
    /// Exact `‖f‖∞`.
    pub sup_norm: f64,
    /// Exact `‖f‖_Y`.
    pub y_seminorm: f64,
    pub variance: f64,
    /// `None` when `f` is constant (then `C = 0`).
    pub bound: Option<BoundResult>,
    pub c: f64,
    pub tails: Vec<TailCheck>,
}

impl FunctionCertificate {
    pub fn variance_bound(&self) -> f64 {
        self.c / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteGroupEstimates {
    pub n: usize,
    pub group_order: usize,
    pub k_max: usize,
    pub envelope: DecayFit,
    /// `max_{k ≤ certified_through} d(k) / (a e^{−bk})`; at most 1.
    pub envelope_ratio: f64,
    /// Walk length used for the samples; the law is within `floor` of Haar.
    pub walk_steps: usize,
    pub samples: usize,
    pub functions: Vec<FunctionCertificate>,
}

#[derive(Clone, Debug)]
pub struct FiniteGroupOutcome {
    pub estimates: FiniteGroupEstimates,
    pub tv_curve: TvCurve,
    pub verdicts: Vec<Verdict>,
}

/// `#fixed points / n`, centered.
pub fn fixed_point_fraction(kernel: &ExactKernel) -> Vec<f64> {
    let n = kernel.table().degree() as f64;
    center(&kernel.table().tabulate(|p| p.fixed_points() as f64 / n))
}

/// A uniform `[−1, 1]` function, centered.
pub fn random_centered_function<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Vec<f64> {
    let f: Vec<f64> = (0..size).map(|_| rng.random_range(-1.0..=1.0)).collect();
    center(&f)
}

/// Group indices after `steps` steps of the walk from the identity, one per sample.
pub fn walk_samples(kernel: &ExactKernel, steps: usize, samples: usize, seed: u64) -> Result<Vec<usize>> {
    let table = kernel.table();
    let law = kernel.law();
    let denom = law.denominator();
    let actions: Vec<(Vec<usize>, u64)> = law
        .support()
        .iter()
        .map(|(s, w)| table.left_action(s).map(|a| (a, *w)))
        .collect::<Result<_>>()?;
    let start = table.identity_index();
    Ok(par::map_indexed(samples, |i| {
        let mut s = rng::stream(seed, "finite-group/walk", i as u64);
        let mut x = start;
        for _ in 0..steps {
            let mut u = s.random_range(0..denom);
            for (action, w) in &actions {
                if u < *w {
                    x = action[x];
                    break;
                }
                u -= w;
            }
        }
        x
    }))
}

/// Exact hypotheses and bounds for one centered `f`, plus tail checks
/// against the walk samples.
pub fn certify_function(
    kernel: &ExactKernel,
    envelope: &DecayFit,
    label: &str,
    f: &[f64],
    t_grid: &[f64],
    samples: &[usize],
) -> Result<FunctionCertificate> {
    let size = kernel.size();
    if f.len() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: f.len(),
        });
    }
    let sup_norm = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let y_seminorm = kernel.y_seminorm_exact(f)?;
    let variance = f.iter().map(|v| v * v).sum::<f64>() / size as f64;
    let bound = if y_seminorm > 0.0 {
        Some(compute_c(&BoundInputs::new(sup_norm, y_seminorm, envelope.a, envelope.b)?))
    } else {
        None
    };
    let c = bound.map_or(0.0, |b| b.c);
    let tails = t_grid
        .iter()
        .map(|&t| {
            let exact = f.iter().filter(|v| v.abs() >= t).count() as f64 / size as f64;
            let hits = samples.iter().filter(|&&x| f[x].abs() >= t).count();
            let (empirical, empirical_se) = frequency(hits, samples.len());
            Ok(TailCheck {
                t,
                exact,
                empirical,
                empirical_se,
                bound: tail_bound(c, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FunctionCertificate {
        label: label.to_string(),
        sup_norm,
        y_seminorm,
        variance,
        bound,
        c,
        tails,
    })
}

fn certificate_verdicts(cert: &FunctionCertificate) -> Vec<Verdict> {
    let mut v = vec![Verdict::hard_le(
        format!("{}/variance", cert.label),
        cert.variance,
        cert.variance_bound(),
    )];
    for t in &cert.tails {
        v.push(Verdict::hard_le(format!("{}/exact_tail/t={}", cert.label, t.t), t.exact, t.bound));
        v.push(Verdict::hard_le(
            format!("{}/empirical_tail/t={}", cert.label, t.t),
            t.empirical,
            t.bound,
        ));
    }
    v
}

pub fn finite_group_experiment(cfg: &ExperimentConfig) -> Result<FiniteGroupOutcome> {
    cfg.require_kind(ExperimentKind::FiniteGroup)?;
    let n = cfg.order()?;
    let k_max = cfg.k_max.unwrap_or(40 * n);
    let step = StepDistribution::LazyTransposition { n };
    let kernel = build_exact_kernel(n, &step)?;
    let tv_curve = exact_tv_curve(n, &step, k_max)?;
    let envelope = fit_decay(&tv_curve, DEFAULT_FLOOR)?;
    if envelope.certified_through == tv_curve.k_max() {
        return Err(Error::config(
            "k_max",
            format!("TV curve is still above {DEFAULT_FLOOR:e} at k = {k_max}; raise k_max"),
        ));
    }
    let envelope_ratio = (0..=envelope.certified_through)
        .map(|k| tv_curve.value(k) / envelope.envelope(k as f64))
        .fold(0.0f64, f64::max);

    let walk_steps = envelope.certified_through + 1;
    let samples = walk_samples(&kernel, walk_steps, cfg.replicates, cfg.seed)?;

    let mut functions: Vec<(String, Vec<f64>)> = vec![("fixed_point_fraction".into(), fixed_point_fraction(&kernel))];
    for j in 0..cfg.num_functions.unwrap_or(20) {
        let mut s = rng::stream(cfg.seed, "finite-group/f", j as u64);
        functions.push((format!("random_{j}"), random_centered_function(kernel.size(), &mut s)));
    }
    let certificates = par::try_map_indexed(functions.len(), |i| {
        let (label, f) = &functions[i];
        certify_function(&kernel, &envelope, label, f, &cfg.t_grid, &samples)
    })?;

    let mut verdicts = vec![Verdict::hard_le("envelope_dominates", envelope_ratio, 1.0)];
    for c in &certificates {
        verdicts.extend(certificate_verdicts(c));
    }

    Ok(FiniteGroupOutcome {
        estimates: FiniteGroupEstimates {
            n,
            group_order: kernel.size(),
            k_max,
            envelope,
            envelope_ratio,
            walk_steps,
            samples: cfg.replicates,
            functions: certificates,
        },
        tv_curve,
        verdicts,
    })
}

pub fn run_finite_group_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let out = finite_group_experiment(cfg)?;
    let est = &out.estimates;
    let tv_rows = out
        .tv_curve
        .values
        .iter()
        .enumerate()
        .map(|(k, &d)| vec![k as f64, d, est.envelope.envelope(k as f64)])
        .collect();
    let fn_rows = est
        .functions
        .iter()
        .enumerate()
        .map(|(i, c)| vec![i as f64, c.sup_norm, c.y_seminorm, c.variance, c.c, c.variance_bound()])
        .collect();
    let tail_rows = est
        .functions
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            c.tails
                .iter()
                .map(move |t| vec![i as f64, t.t, t.exact, t.empirical, t.empirical_se, t.bound])
        })
        .collect();
    let bounds = serde_json::json!({
        "a": est.envelope.a,
        "b": est.envelope.b,
        "C": est.functions.iter().map(|c| c.c).collect::<Vec<_>>(),
        "variance_bound": est.functions.iter().map(|c| c.variance_bound()).collect::<Vec<_>>(),
    });
    Ok(ExperimentReport {
        config_echo: cfg.to_json_value(),
        estimates: to_value(est),
        bounds,
        verdicts: out.verdicts,
        environment: environment(cfg.seed, cfg.replicates, started),
        curves: vec![
            Curve::new("tv_curve", &["k", "tv", "envelope"], tv_rows),
            Curve::new(
                "functions",
                &["index", "sup_norm", "y_seminorm", "variance", "C", "variance_bound"],
                fn_rows,
            ),
            Curve::new(
                "function_tails",
                &["index", "t", "exact", "empirical", "empirical_se", "bound"],
                tail_rows,
            ),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_variance_at_five() {
        let k = build_exact_kernel(5, &StepDistribution::LazyTransposition { n: 5 }).unwrap();
        let f = fixed_point_fraction(&k);
        let var = f.iter().map(|v| v * v).sum::<f64>() / 120.0;
        assert!((var - 1.0 / 25.0).abs() < 1e-15);
    }

    #[test]
    fn constant_function_is_trivial() {
        let step = StepDistribution::LazyTransposition { n: 4 };
        let k = build_exact_kernel(4, &step).unwrap();
        let fit = fit_decay(&exact_tv_curve(4, &step, 160).unwrap(), DEFAULT_FLOOR).unwrap();
        let zero = vec![0.0; 24];
        let cert = certify_function(&k, &fit, "zero", &zero, &[0.1, 0.5], &[0, 1, 2]).unwrap();
        assert_eq!((cert.variance, cert.c), (0.0, 0.0));
        assert!(cert.tails.iter().all(|t| t.exact == 0.0 && t.empirical == 0.0));
        assert!(certificate_verdicts(&cert).iter().all(|v| v.passed()));
    }

    #[test]
    fn small_run_passes() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"kind":"finite-group","n":4,"seed":9,"replicates":2000,"num_functions":3}"#,
        )
        .unwrap();
        let out = finite_group_experiment(&cfg).unwrap();
        assert!(out.verdicts.iter().all(|v| v.passed()), "{:?}", out.verdicts);
        assert_eq!(out.estimates.functions.len(), 4);
    }
}
