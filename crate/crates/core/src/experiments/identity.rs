//! Exchangeable-pair identities on `S_n`, checked exactly for random `f`.

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{environment, to_value, Curve, ExperimentReport, Verdict};
use crate::groups::StepDistribution;
use crate::kernel::{build_exact_kernel, center, IdentityReport, DEFAULT_SERIES_EPS};
use crate::{par, rng, Result};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::time::Instant;

pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityEstimates {
    pub n: usize,
    pub functions: usize,
    pub max_stein_residual: f64,
    pub max_variance_residual: f64,
    pub max_series_terms: usize,
    /// Residuals for `f ≡ 0`.
    pub zero_function: IdentityReport,
    pub reports: Vec<IdentityReport>,
}

pub fn identity_suite(cfg: &ExperimentConfig) -> Result<(IdentityEstimates, Vec<Verdict>)> {
    cfg.require_kind(ExperimentKind::IdentitySuite)?;
    let n = cfg.order()?;
    let kernel = build_exact_kernel(n, &StepDistribution::LazyTransposition { n })?;
    let size = kernel.size();
    let reports = par::try_map_indexed(cfg.replicates, |r| {
        let mut s = rng::stream(cfg.seed, "identity/f", r as u64);
        let f: Vec<f64> = StandardNormal.sample_iter(&mut s).take(size).collect();
        kernel.check_identities(&center(&f), DEFAULT_SERIES_EPS)
    })?;
    let zero_function = kernel.check_identities(&vec![0.0; size], DEFAULT_SERIES_EPS)?;
    let max_stein_residual = reports.iter().fold(0.0f64, |a, r| a.max(r.stein_residual));
    let max_variance_residual = reports.iter().fold(0.0f64, |a, r| a.max(r.variance_residual));
    let verdicts = vec![
        Verdict::hard_le("stein_residual", max_stein_residual, IDENTITY_TOL),
        Verdict::hard_le("variance_residual", max_variance_residual, IDENTITY_TOL),
        Verdict::hard_le(
            "zero_function_residual",
            zero_function.stein_residual.max(zero_function.variance_residual),
            0.0,
        ),
    ];
    Ok((
        IdentityEstimates {
            n,
            functions: cfg.replicates,
            max_stein_residual,
            max_variance_residual,
            max_series_terms: reports.iter().map(|r| r.terms).max().unwrap_or(0),
            zero_function,
            reports,
        },
        verdicts,
    ))
}

pub fn run_identity_suite(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let (est, verdicts) = identity_suite(cfg)?;
    let rows = est
        .reports
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i as f64, r.variance, r.stein_residual, r.variance_residual, r.terms as f64])
        .collect();
    Ok(ExperimentReport {
        config_echo: cfg.to_json_value(),
        estimates: to_value(&est),
        bounds: serde_json::json!({ "residual_tolerance": IDENTITY_TOL }),
        verdicts,
        environment: environment(cfg.seed, cfg.replicates, started),
        curves: vec![Curve::new(
            "identity_residuals",
            &["index", "variance", "stein_residual", "variance_residual", "terms"],
            rows,
        )],
    })
}
