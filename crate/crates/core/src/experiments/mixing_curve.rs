//! Mixing curves: the exact TV curve on `S_n` and the trace-moment proxy on `U(n)`.

use super::report::{environment, to_value, ExperimentReport, Verdict};
use crate::bounds::{compute_c, implied_kappa, BoundInputs};
use crate::groups::StepDistribution;
use crate::mixing::{exact_tv_curve, fit_decay, unitary_mixing_diagnostic, DEFAULT_FLOOR};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingGroup {
    Symmetric,
    Unitary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingCurveRequest {
    pub group: MixingGroup,
    pub n: usize,
    pub k_max: usize,
    /// Monte Carlo replicates; ignored for the symmetric group.
    pub replicates: usize,
    pub seed: u64,
}

/// `κ` implied by plugging the proxy fit into the concentration constant with
/// `A = 1` and `B = 3/n` (the bounds for `U ↦ F_{UMU*+N}(x)`). Not certified:
/// the proxy is not total variation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineKappa {
    pub label: String,
    #[serde(rename = "C")]
    pub c: f64,
    pub kappa: f64,
}

fn pipeline_kappa(n: usize, a: f64, b: f64) -> Result<PipelineKappa> {
    let bound = compute_c(&BoundInputs::new(1.0, 3.0 / n as f64, a, b)?);
    Ok(PipelineKappa {
        label: "UNCERTIFIED: from the trace-moment proxy fit, not a TV envelope".into(),
        c: bound.c,
        kappa: implied_kappa(n, bound.c)?,
    })
}

pub fn run_mixing_curve(req: &MixingCurveRequest) -> Result<ExperimentReport> {
    let started = Instant::now();
    let echo = to_value(req);
    match req.group {
        MixingGroup::Symmetric => {
            let step = StepDistribution::LazyTransposition { n: req.n };
            let curve = exact_tv_curve(req.n, &step, req.k_max)?;
            let fit = fit_decay(&curve, DEFAULT_FLOOR).ok();
            let mut verdicts = vec![Verdict::hard_le(
                "tv_non_increasing",
                curve.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max),
                1e-15,
            )];
            if let Some(f) = &fit {
                let ratio = (0..=f.certified_through.min(curve.k_max()))
                    .map(|k| curve.value(k) / f.envelope(k as f64))
                    .fold(0.0f64, f64::max);
                verdicts.push(Verdict::hard_le("envelope_dominates", ratio, 1.0));
            }
            Ok(ExperimentReport {
                config_echo: echo,
                estimates: serde_json::json!({ "tv": curve.values }),
                bounds: serde_json::json!({ "envelope": to_value(&fit) }),
                verdicts,
                environment: environment(req.seed, 0, started),
                curves: vec![curve.to_curve("mixing_curve")],
            })
        }
        MixingGroup::Unitary => {
            let diag = unitary_mixing_diagnostic(req.n, req.k_max, req.replicates, req.seed)?;
            let kappa = match &diag.proxy_fit {
                Some(f) => Some(pipeline_kappa(req.n, f.a, f.b)?),
                None => None,
            };
            Ok(ExperimentReport {
                config_echo: echo,
                estimates: to_value(&diag),
                bounds: serde_json::json!({ "pipeline_kappa": to_value(&kappa) }),
                verdicts: Vec::new(),
                environment: environment(req.seed, req.replicates, started),
                curves: vec![diag.to_curve("mixing_curve")],
            })
        }
    }
}
