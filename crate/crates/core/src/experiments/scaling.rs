//! Scaling of `n·Var F_H(x) / log n` over a grid of orders.

use super::config::{ExperimentConfig, ExperimentKind};
use super::matrix::{matrix_curves, matrix_experiment_at, MatrixBounds, MatrixEstimates};
use super::report::{environment, to_value, Curve, ExperimentReport, Verdict, SE_POLICY};
use crate::{Error, Result};
use serde::Serialize;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub x: f64,
    pub variance: f64,
    pub variance_se: f64,
    /// `ρ = n·Var/log n`.
    pub ratio: f64,
    pub ratio_se: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingEstimates {
    pub points: Vec<ScalingPoint>,
    /// Largest point estimate of `ρ`: the smallest `κ` the data support.
    pub kappa_empirical: f64,
    pub max_ratio_upper: f64,
    pub per_n: Vec<MatrixEstimates>,
}

#[derive(Clone, Debug)]
pub struct ScalingOutcome {
    pub estimates: ScalingEstimates,
    pub bounds: Vec<MatrixBounds>,
    pub verdicts: Vec<Verdict>,
}

pub fn scaling_study(cfg: &ExperimentConfig) -> Result<ScalingOutcome> {
    cfg.require_kind(ExperimentKind::Scaling)?;
    let grid = cfg.orders();
    if grid.is_empty() {
        return Err(Error::config("n_grid", "grid is empty"));
    }
    let mut points = Vec::new();
    let mut per_n = Vec::new();
    let mut bounds = Vec::new();
    let mut verdicts = Vec::new();
    for &n in &grid {
        let out = matrix_experiment_at(cfg, n)?;
        let scale = n as f64 / (n as f64).ln();
        for p in &out.estimates.points {
            let ratio = scale * p.variance;
            let ratio_se = scale * p.variance_se;
            points.push(ScalingPoint {
                n,
                x: p.x,
                variance: p.variance,
                variance_se: p.variance_se,
                ratio,
                ratio_se,
                ratio_lower: (ratio - SE_POLICY * ratio_se).max(0.0),
                ratio_upper: ratio + SE_POLICY * ratio_se,
            });
            verdicts.push(Verdict::stat_le(format!("n={n}/ratio/x={}", p.x), ratio, ratio_se, cfg.kappa));
        }
        // variance verdicts are the ratio verdicts above, rescaled
        verdicts.extend(out.verdicts.into_iter().filter(|v| !v.name.contains("/variance/")));
        per_n.push(out.estimates);
        bounds.push(out.bounds);
    }
    let kappa_empirical = points.iter().fold(0.0f64, |a, p| a.max(p.ratio));
    let max_ratio_upper = points.iter().fold(0.0f64, |a, p| a.max(p.ratio_upper));
    Ok(ScalingOutcome {
        estimates: ScalingEstimates {
            points,
            kappa_empirical,
            max_ratio_upper,
            per_n,
        },
        bounds,
        verdicts,
    })
}

pub fn run_scaling_study(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let out = scaling_study(cfg)?;
    let rows = out
        .estimates
        .points
        .iter()
        .map(|p| vec![p.n as f64, p.x, p.ratio, p.ratio_se, p.ratio_lower, p.ratio_upper])
        .collect();
    let mut curves = vec![Curve::new(
        "scaling_ratio",
        &["n", "x", "ratio", "ratio_se", "ratio_lower", "ratio_upper"],
        rows,
    )];
    // per-n tables, concatenated in grid order
    let mut variance: Option<Curve> = None;
    let mut tails: Option<Curve> = None;
    for (est, b) in out.estimates.per_n.iter().zip(&out.bounds) {
        let [v, t] = matrix_curves(est, b);
        for (acc, c) in [(&mut variance, v), (&mut tails, t)] {
            match acc {
                Some(a) => a.rows.extend(c.rows),
                None => *acc = Some(c),
            }
        }
    }
    curves.extend(variance);
    curves.extend(tails);
    Ok(ExperimentReport {
        config_echo: cfg.to_json_value(),
        estimates: to_value(&out.estimates),
        bounds: serde_json::json!({
            "kappa": cfg.kappa,
            "per_n": to_value(&out.bounds),
        }),
        verdicts: out.verdicts,
        environment: environment(cfg.seed, cfg.replicates, started),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spectra_give_zero_ratio() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"kind":"scaling","n_grid":[4,6],"seed":1,"replicates":20,"spectrum_M":"zero","spectrum_N":"zero"}"#,
        )
        .unwrap();
        let out = scaling_study(&cfg).unwrap();
        assert!(out.estimates.points.iter().all(|p| p.ratio == 0.0));
        assert_eq!(out.estimates.kappa_empirical, 0.0);
    }
}
