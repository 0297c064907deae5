//! The random-matrix pipeline on `U(n)`: fluctuations of `F_H(x)` for
//! `H = UMU* + VNV*`, and the one-step perturbation `H → H′`.

use super::config::{ExperimentConfig, ExperimentKind, SpectrumSpec};
use super::report::{environment, to_value, Curve, ExperimentReport, Verdict};
use crate::bounds::theorem1_bounds;
use crate::groups::{sample_haar_unitary, sample_reflection_step, ReflectionStep, UnitaryMatrix};
use crate::hermitian::{
    conjugate_diagonal, eigenvalues, rank_distance, sup_cdf_distance, HermitianMatrix, DEFAULT_RANK_TOL,
};
use crate::stats::{frequency, Summary};
use crate::{par, rng, Error, Result};
use serde::Serialize;
use std::time::Instant;

/// Tail verdicts need at least this many replicates.
pub const MIN_TAIL_REPLICATES: usize = 500;
/// Slack on the `3/n` gap for rounding in the eigenvalues.
pub const GAP_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub t: f64,
    /// Share of replicates with `|F_H(x) − mean| ≥ t`.
    pub frequency: f64,
    pub stderr: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointEstimate {
    pub x: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub variance_ci: (f64, f64),
    pub tails: Vec<TailPoint>,
    /// Mean of `F_H̃(x)` for the reduced form, when run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_mean_se: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixEstimates {
    pub n: usize,
    pub replicates: usize,
    pub points: Vec<PointEstimate>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reflection_step: Option<ReflectionStepSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixBounds {
    pub kappa: f64,
    /// `κ log n / n`.
    pub variance_bound: f64,
    /// `(t, 2 exp(−n t²/(2κ log n)))`.
    pub tail_curve: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReflectionStepSummary {
    pub n: usize,
    pub replicates: usize,
    pub max_rank: usize,
    pub max_cdf_gap: f64,
    pub gap_limit: f64,
    /// `rank_counts[r]` is the number of replicates with `rank(H − H′) = r`.
    pub rank_counts: Vec<usize>,
}

/// Everything a matrix experiment computes, before it is flattened into a
/// report.
#[derive(Clone, Debug)]
pub struct MatrixOutcome {
    pub estimates: MatrixEstimates,
    pub bounds: MatrixBounds,
    pub verdicts: Vec<Verdict>,
    /// `F_H(x)` per replicate, row-major by replicate.
    pub samples: Vec<Vec<f64>>,
}

fn stream_label(form: &str, n: usize) -> String {
    format!("matrix/{form}/n={n}")
}

/// `F_H(x)` on the grid for one draw of `H = UMU* + VNV*`.
pub fn definition_form_sample(
    n: usize,
    spectrum_m: &SpectrumSpec,
    spectrum_n: &SpectrumSpec,
    x_grid: &[f64],
    seed: u64,
    replicate: u64,
) -> Result<Vec<f64>> {
    let mut s = rng::stream(seed, &stream_label("definition", n), replicate);
    let m = spectrum_m.resolve(n, &mut s)?;
    let nn = spectrum_n.resolve(n, &mut s)?;
    let u = sample_haar_unitary(n, &mut s)?;
    let v = sample_haar_unitary(n, &mut s)?;
    let h = conjugate_diagonal(&u, &m)?.add(&conjugate_diagonal(&v, &nn)?)?;
    let cdf = eigenvalues(&h)?;
    Ok(x_grid.iter().map(|&x| cdf.value(x)).collect())
}

/// `F_H̃(x)` for one draw of the reduced form `H̃ = XMX* + N`.
pub fn reduced_form_sample(
    n: usize,
    spectrum_m: &SpectrumSpec,
    spectrum_n: &SpectrumSpec,
    x_grid: &[f64],
    seed: u64,
    replicate: u64,
) -> Result<Vec<f64>> {
    let mut s = rng::stream(seed, &stream_label("reduced", n), replicate);
    let m = spectrum_m.resolve(n, &mut s)?;
    let nn = spectrum_n.resolve(n, &mut s)?;
    let x = sample_haar_unitary(n, &mut s)?;
    let h = conjugate_diagonal(&x, &m)?.add(&HermitianMatrix::from_real_diagonal(&nn))?;
    let cdf = eigenvalues(&h)?;
    Ok(x_grid.iter().map(|&x| cdf.value(x)).collect())
}

fn column(samples: &[Vec<f64>], j: usize) -> Vec<f64> {
    samples.iter().map(|row| row[j]).collect()
}

/// Runs the definition form (and the reduced form if requested) at order `n`.
pub fn matrix_experiment_at(cfg: &ExperimentConfig, n: usize) -> Result<MatrixOutcome> {
    let reps = cfg.replicates;
    let samples = par::try_map_indexed(reps, |r| {
        definition_form_sample(n, &cfg.spectrum_m, &cfg.spectrum_n, &cfg.x_grid, cfg.seed, r as u64)
    })?;
    let reduced = if cfg.reduced_form {
        Some(par::try_map_indexed(reps, |r| {
            reduced_form_sample(n, &cfg.spectrum_m, &cfg.spectrum_n, &cfg.x_grid, cfg.seed, r as u64)
        })?)
    } else {
        None
    };

    let variance_bound = theorem1_bounds(n, cfg.kappa, 0.0)?.variance_bound;
    let tail_curve = cfg
        .t_grid
        .iter()
        .map(|&t| Ok((t, theorem1_bounds(n, cfg.kappa, t)?.tail)))
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let tails_checked = reps >= MIN_TAIL_REPLICATES;
    if !tails_checked && !cfg.t_grid.is_empty() {
        warnings.push(format!(
            "{reps} replicates is below {MIN_TAIL_REPLICATES}; tail frequencies are reported without verdicts"
        ));
    }

    let mut points = Vec::with_capacity(cfg.x_grid.len());
    let mut verdicts = Vec::new();
    for (j, &x) in cfg.x_grid.iter().enumerate() {
        let values = column(&samples, j);
        let s = Summary::of(&values);
        let tails: Vec<TailPoint> = tail_curve
            .iter()
            .map(|&(t, bound)| {
                let hits = values.iter().filter(|&&v| (v - s.mean).abs() >= t).count();
                let (frequency, stderr) = frequency(hits, reps);
                TailPoint {
                    t,
                    frequency,
                    stderr,
                    bound,
                }
            })
            .collect();

        verdicts.push(Verdict::stat_le(
            format!("n={n}/variance/x={x}"),
            s.variance,
            s.variance_se,
            variance_bound,
        ));
        if tails_checked {
            for tp in &tails {
                verdicts.push(Verdict::stat_tail(
                    format!("n={n}/tail/x={x}/t={}", tp.t),
                    tp.frequency,
                    tp.stderr,
                    tp.bound,
                ));
            }
        }

        let (reduced_mean, reduced_mean_se) = match &reduced {
            Some(rs) => {
                let r = Summary::of(&column(rs, j));
                let pooled = (s.mean_se.powi(2) + r.mean_se.powi(2)).sqrt();
                verdicts.push(Verdict::stat_agree(
                    format!("n={n}/forms_agree/x={x}"),
                    s.mean - r.mean,
                    pooled,
                ));
                (Some(r.mean), Some(r.mean_se))
            }
            None => (None, None),
        };

        points.push(PointEstimate {
            x,
            mean: s.mean,
            mean_se: s.mean_se,
            variance: s.variance,
            variance_se: s.variance_se,
            variance_ci: s.variance_ci(super::report::SE_POLICY),
            tails,
            reduced_mean,
            reduced_mean_se,
        });
    }

    Ok(MatrixOutcome {
        estimates: MatrixEstimates {
            n,
            replicates: reps,
            points,
            warnings,
            reflection_step: None,
        },
        bounds: MatrixBounds {
            kappa: cfg.kappa,
            variance_bound,
            tail_curve,
        },
        verdicts,
        samples,
    })
}

pub(crate) fn matrix_curves(estimates: &MatrixEstimates, bounds: &MatrixBounds) -> [Curve; 2] {
    let n = estimates.n as f64;
    let rows = estimates
        .points
        .iter()
        .map(|p| {
            vec![
                n,
                p.x,
                p.mean,
                p.mean_se,
                p.variance,
                p.variance_se,
                p.variance_ci.0,
                p.variance_ci.1,
                bounds.variance_bound,
            ]
        })
        .collect();
    let tails = estimates
        .points
        .iter()
        .flat_map(|p| p.tails.iter().map(move |t| vec![n, p.x, t.t, t.frequency, t.stderr, t.bound]))
        .collect();
    [
        Curve::new(
            "variance",
            &["n", "x", "mean", "mean_se", "variance", "variance_se", "ci_low", "ci_high", "bound"],
            rows,
        ),
        Curve::new("tails", &["n", "x", "t", "frequency", "stderr", "bound"], tails),
    ]
}

/// `(rank(H − H′), ‖F_H − F_{H′}‖∞)` for `H = XMX* + N` and `H′ = (YX)M(YX)* + N`.
pub fn reflection_step_instance(x: &UnitaryMatrix, y: &ReflectionStep, m: &[f64], nn: &[f64]) -> Result<(usize, f64)> {
    let n = x.dim();
    if y.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.dim(),
        });
    }
    let yx = UnitaryMatrix::with_tolerance(y.left_multiply(x.matrix()), 1e-10)?;
    let base = HermitianMatrix::from_real_diagonal(nn);
    let h = conjugate_diagonal(x, m)?.add(&base)?;
    let h2 = conjugate_diagonal(&yx, m)?.add(&base)?;
    let rank = rank_distance(&h, &h2, DEFAULT_RANK_TOL)?;
    let gap = sup_cdf_distance(&eigenvalues(&h)?, &eigenvalues(&h2)?)?;
    Ok((rank, gap))
}

/// Summary and hard verdicts of the one-step check at order `n`.
pub fn reflection_step_at(
    n: usize,
    spectrum_m: &SpectrumSpec,
    spectrum_n: &SpectrumSpec,
    replicates: usize,
    seed: u64,
) -> Result<(ReflectionStepSummary, Vec<Verdict>)> {
    let results = par::try_map_indexed(replicates, |r| {
        let mut s = rng::stream(seed, &format!("reflection-step/n={n}"), r as u64);
        let m = spectrum_m.resolve(n, &mut s)?;
        let nn = spectrum_n.resolve(n, &mut s)?;
        let x = sample_haar_unitary(n, &mut s)?;
        let y = sample_reflection_step(n, &mut s)?;
        reflection_step_instance(&x, &y, &m, &nn)
    })?;
    let mut rank_counts = vec![0usize; n + 1];
    let mut max_rank = 0;
    let mut max_gap = 0.0f64;
    for &(rank, gap) in &results {
        rank_counts[rank] += 1;
        max_rank = max_rank.max(rank);
        max_gap = max_gap.max(gap);
    }
    let gap_limit = 3.0 / n as f64;
    let verdicts = vec![
        Verdict::hard_le(format!("n={n}/step_rank"), max_rank as f64, 3.0),
        Verdict::hard_le(format!("n={n}/step_cdf_gap"), max_gap, gap_limit + GAP_SLACK),
    ];
    Ok((
        ReflectionStepSummary {
            n,
            replicates,
            max_rank,
            max_cdf_gap: max_gap,
            gap_limit,
            rank_counts,
        },
        verdicts,
    ))
}

fn report_from(cfg: &ExperimentConfig, outcome: MatrixOutcome, started: Instant) -> ExperimentReport {
    let curves = matrix_curves(&outcome.estimates, &outcome.bounds).into();
    ExperimentReport {
        config_echo: cfg.to_json_value(),
        estimates: to_value(&outcome.estimates),
        bounds: to_value(&outcome.bounds),
        verdicts: outcome.verdicts,
        environment: environment(cfg.seed, cfg.replicates, started),
        curves,
    }
}

/// Matrix experiment; runs the one-step check too when `step_check` is set.
pub fn run_matrix_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.require_kind(ExperimentKind::Matrix)?;
    let started = Instant::now();
    let n = cfg.order()?;
    let mut outcome = matrix_experiment_at(cfg, n)?;
    if cfg.step_check {
        let (summary, verdicts) = reflection_step_at(n, &cfg.spectrum_m, &cfg.spectrum_n, cfg.replicates, cfg.seed)?;
        outcome.estimates.reflection_step = Some(summary);
        outcome.verdicts.extend(verdicts);
    }
    Ok(report_from(cfg, outcome, started))
}

/// The one-step check alone.
pub fn run_reflection_step_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.require_kind(ExperimentKind::Matrix)?;
    if !cfg.step_check {
        return Err(Error::config("step_check", "the reflection-step experiment needs step_check = true"));
    }
    let started = Instant::now();
    let n = cfg.order()?;
    let (summary, verdicts) = reflection_step_at(n, &cfg.spectrum_m, &cfg.spectrum_n, cfg.replicates, cfg.seed)?;
    let rows = summary
        .rank_counts
        .iter()
        .enumerate()
        .map(|(r, &c)| vec![r as f64, c as f64])
        .collect();
    Ok(ExperimentReport {
        config_echo: cfg.to_json_value(),
        estimates: to_value(&summary),
        bounds: serde_json::json!({ "max_rank": 3, "gap_limit": summary.gap_limit }),
        verdicts,
        environment: environment(cfg.seed, cfg.replicates, started),
        curves: vec![Curve::new("step_rank_counts", &["rank", "count"], rows)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::SpectrumGenerator;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json_str(text).unwrap()
    }

    #[test]
    fn zero_spectra_are_deterministic() {
        let c = cfg(r#"{"kind":"matrix","n":5,"seed":2,"replicates":50,"spectrum_M":"zero","spectrum_N":"zero"}"#);
        let out = matrix_experiment_at(&c, 5).unwrap();
        for p in &out.estimates.points {
            assert_eq!(p.variance, 0.0);
            assert_eq!(p.mean, if p.x < 0.0 { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn identity_step_changes_nothing() {
        let mut s = rng::stream(1, "t", 0);
        let x = sample_haar_unitary(6, &mut s).unwrap();
        let y = ReflectionStep::identity(6).unwrap();
        let m = SpectrumSpec::Named(SpectrumGenerator::UniformGrid).resolve(6, &mut s).unwrap();
        let (rank, gap) = reflection_step_instance(&x, &y, &m, &[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!((rank, gap), (0, 0.0));
    }

    #[test]
    fn step_check_small() {
        let m = SpectrumSpec::Named(SpectrumGenerator::TwoPoint);
        let (summary, verdicts) = reflection_step_at(8, &m, &m, 40, 5).unwrap();
        assert!(summary.max_rank <= 3);
        assert!(verdicts.iter().all(|v| v.passed()));
    }
}
