//! End-to-end pipelines and their reports.

pub mod config;
pub mod finite_group;
pub mod identity;
pub mod matrix;
pub mod mixing_curve;
pub mod report;
pub mod scaling;

pub use config::{parse_config, ExperimentConfig, ExperimentKind, SpectrumGenerator, SpectrumSpec};
pub use finite_group::run_finite_group_experiment;
pub use identity::run_identity_suite;
pub use matrix::{run_matrix_experiment, run_reflection_step_experiment};
pub use mixing_curve::{run_mixing_curve, MixingCurveRequest, MixingGroup};
pub use report::{Curve, ExperimentReport, Outcome, Verdict, VerdictStatus};
pub use scaling::run_scaling_study;

use crate::Result;

/// Dispatches on `cfg.kind`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        ExperimentKind::Matrix => run_matrix_experiment(cfg),
        ExperimentKind::FiniteGroup => run_finite_group_experiment(cfg),
        ExperimentKind::IdentitySuite => run_identity_suite(cfg),
        ExperimentKind::Scaling => run_scaling_study(cfg),
    }
}
