//! Total-variation decay of the walks.
//!
//! On `S_n` the law of `Y₁⋯Y_k` is computed exactly by repeated convolution,
//! and [`fit_decay`] turns the curve into an envelope `a·e^{−bk}` that dominates
//! every computed point above the floor. On `U(n)` total variation is not
//! computable, so [`unitary_mixing_diagnostic`] tracks the proxy
//! `|E|Tr(Y₁⋯Y_k)|² − 1|` (the Haar value of the moment is 1).

use crate::experiments::Curve;
use crate::groups::{sample_reflection_step, StepDistribution};
use crate::kernel::FiniteGroupTable;
use crate::stats::Summary;
use crate::{par, rng, Error, Result, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub const DEFAULT_FLOOR: f64 = 1e-12;
/// Upper end of the fit window; earlier points sit on the pre-cutoff plateau.
pub const FIT_CEILING: f64 = 0.5;
pub const MIN_DIAGNOSTIC_REPS: usize = 1000;

/// `d_TV(law(Y₁⋯Y_k), Haar)` for `k = 0, …, k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvCurve {
    pub values: Vec<f64>,
}

impl TvCurve {
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn k_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn is_non_increasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn to_curve(&self, name: &str) -> Curve {
        Curve::new(
            name,
            &["k", "value", "stderr"],
            self.values
                .iter()
                .enumerate()
                .map(|(k, &v)| vec![k as f64, v, f64::NAN])
                .collect(),
        )
    }
}

/// Exact laws `p_k` of `Y₁⋯Y_k` for `k = 0, …, k_max`, indexed by Lehmer rank.
pub fn step_law_powers(table: &FiniteGroupTable, step: &StepDistribution, k_max: usize) -> Result<Vec<Vec<f64>>> {
    let law = step.exact_law()?;
    if law.degree() != table.degree() {
        return Err(Error::DimensionMismatch {
            expected: table.degree(),
            found: law.degree(),
        });
    }
    let denom = law.denominator() as f64;
    let actions: Vec<(Vec<usize>, f64)> = law
        .support()
        .iter()
        .map(|(s, w)| table.left_action(s).map(|a| (a, *w as f64 / denom)))
        .collect::<Result<_>>()?;
    let mut p = vec![0.0; table.len()];
    p[table.identity_index()] = 1.0;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(p.clone());
    for _ in 0..k_max {
        let mut next = vec![0.0; table.len()];
        for (action, mass) in &actions {
            for (g, &pg) in p.iter().enumerate() {
                if pg != 0.0 {
                    next[action[g]] += mass * pg;
                }
            }
        }
        p = next;
        out.push(p.clone());
    }
    Ok(out)
}

fn tv_to_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.iter().map(|x| (x - u).abs()).sum::<f64>()
}

pub fn exact_tv_curve(n: usize, step: &StepDistribution, k_max: usize) -> Result<TvCurve> {
    if step.degree() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: step.degree(),
        });
    }
    step.exact_law()?;
    let table = FiniteGroupTable::new(n)?;
    let laws = step_law_powers(&table, step, k_max)?;
    Ok(TvCurve {
        values: laws.iter().map(|p| tv_to_uniform(p)).collect(),
    })
}

/// Envelope `d(k) ≤ a·e^{−bk}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    /// `b⁻¹ log a`.
    pub tau: f64,
    /// Least-squares prefactor before inflation.
    pub a_fit: f64,
    /// Inclusive `k` range used by the least-squares fit.
    pub window: (usize, usize),
    /// Max `|log d(k) − (log a_fit − bk)|` over the window.
    pub residual: f64,
    /// The envelope dominates `d(k)` for every `k ≤ certified_through`.
    pub certified_through: usize,
}

impl DecayFit {
    pub fn envelope(&self, k: f64) -> f64 {
        self.a * (-self.b * k).exp()
    }
}

fn least_squares_log(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        let dx = x - mx;
        (sxy + dx * (y.ln() - my), sxx + dx * dx)
    });
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = points
        .iter()
        .map(|&(x, y)| (y.ln() - (intercept + slope * x)).abs())
        .fold(0.0f64, f64::max);
    (slope, intercept, residual)
}

// Relative margin so the envelope check survives rounding in `a·e^{−bk}`.
const ENVELOPE_MARGIN: f64 = 1e-12;

fn envelope_fit(
    points: &[(f64, f64)],
    dominate: &[(f64, f64)],
    window: (usize, usize),
    certified_through: usize,
) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "decay fit needs at least 3 usable points, got {}",
            points.len()
        )));
    }
    let (slope, intercept, residual) = least_squares_log(points);
    let b = -slope;
    if !(b > 0.0) {
        return Err(Error::invalid("curve does not decay (non-positive fitted rate)"));
    }
    let a_fit = intercept.exp();
    let a = dominate
        .iter()
        .map(|&(k, d)| d * (b * k).exp())
        .fold(a_fit, f64::max)
        * (1.0 + ENVELOPE_MARGIN);
    Ok(DecayFit {
        a,
        b,
        tau: a.ln() / b,
        a_fit,
        window,
        residual,
        certified_through,
    })
}

/// Log-linear least squares on the points with `floor < d(k) < 0.5`, then `a`
/// is raised until `a·e^{−bk} ≥ d(k)` for every `k` up to the last point above
/// the floor.
pub fn fit_decay(curve: &TvCurve, floor: f64) -> Result<DecayFit> {
    let vals = &curve.values;
    let window: Vec<(f64, f64)> = vals
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d > floor && d < FIT_CEILING)
        .map(|(k, &d)| (k as f64, d))
        .collect();
    let first = window.first().map_or(0, |p| p.0 as usize);
    let last = window.last().map_or(0, |p| p.0 as usize);
    let certified_through = vals.iter().rposition(|&d| d > floor).unwrap_or(0);
    let dominate: Vec<(f64, f64)> = vals[..=certified_through.min(vals.len().saturating_sub(1))]
        .iter()
        .enumerate()
        .map(|(k, &d)| (k as f64, d))
        .collect();
    envelope_fit(&window, &dominate, (first, last), certified_through)
}

/// `α n^{β/2} e^{−βk/n}`.
pub fn porod_bound(alpha: f64, beta: f64, n: usize, k: f64) -> Result<f64> {
    let (a, b) = porod_decay_params(alpha, beta, n)?;
    Ok(a * (-b * k).exp())
}

/// The `(a, b) = (α n^{β/2}, β/n)` pair that the Porod rate supplies.
pub fn porod_decay_params(alpha: f64, beta: f64, n: usize) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && beta > 0.0 && n >= 1) {
        return Err(Error::invalid("porod constants need alpha > 0, beta > 0, n >= 1"));
    }
    let nf = n as f64;
    Ok((alpha * nf.powf(beta / 2.0), beta / nf))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub k: usize,
    /// Monte Carlo estimate of `E|Tr(Y₁⋯Y_k)|²`.
    pub mean: f64,
    pub stderr: f64,
    /// `|mean − 1|`.
    pub deviation: f64,
}

/// Trace-moment mixing proxy for the reflection walk on `U(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMixingDiagnostic {
    pub n: usize,
    pub reps: usize,
    pub label: String,
    pub points: Vec<MomentPoint>,
    /// Fit of `|m(k) − 1|` over the points standing more than 4 standard
    /// errors above zero; `None` when fewer than three such points exist.
    pub proxy_fit: Option<DecayFit>,
}

impl UnitaryMixingDiagnostic {
    pub fn to_curve(&self, name: &str) -> Curve {
        Curve::new(
            name,
            &["k", "value", "stderr"],
            self.points
                .iter()
                .map(|p| vec![p.k as f64, p.mean, p.stderr])
                .collect(),
        )
    }

    /// Successive deviations never grow by more than `z` combined standard errors.
    pub fn eventually_monotone(&self, z: f64) -> bool {
        self.points.windows(2).all(|w| {
            let slack = z * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            w[1].deviation <= w[0].deviation + slack
        })
    }
}

pub fn unitary_mixing_diagnostic(n: usize, k_max: usize, reps: usize, seed: u64) -> Result<UnitaryMixingDiagnostic> {
    if n < 2 {
        return Err(Error::invalid("unitary mixing diagnostic needs n >= 2"));
    }
    if reps < MIN_DIAGNOSTIC_REPS {
        return Err(Error::invalid(format!(
            "unitary mixing diagnostic needs at least {MIN_DIAGNOSTIC_REPS} replicates, got {reps}"
        )));
    }
    let trajectories: Vec<Vec<f64>> = par::try_map_indexed(reps, |r| {
        let mut stream = rng::stream(seed, "unitary-mixing", r as u64);
        let mut w = DMatrix::<C64>::identity(n, n);
        let mut traj = Vec::with_capacity(k_max + 1);
        traj.push(w.trace().norm_sqr());
        for _ in 0..k_max {
            let y = sample_reflection_step(n, &mut stream)?;
            w = y.left_multiply(&w);
            traj.push(w.trace().norm_sqr());
        }
        Ok::<_, Error>(traj)
    })?;
    let points: Vec<MomentPoint> = (0..=k_max)
        .map(|k| {
            let column: Vec<f64> = trajectories.iter().map(|t| t[k]).collect();
            let s = Summary::of(&column);
            MomentPoint {
                k,
                mean: s.mean,
                stderr: s.mean_se,
                deviation: (s.mean - 1.0).abs(),
            }
        })
        .collect();
    let signal: Vec<(f64, f64)> = points
        .iter()
        .skip(1)
        .take_while(|p| p.deviation > 4.0 * p.stderr)
        .map(|p| (p.k as f64, p.deviation))
        .collect();
    let proxy_fit = if signal.len() >= 3 {
        let last = signal.last().map_or(0, |p| p.0 as usize);
        envelope_fit(&signal, &signal, (1, last), last).ok()
    } else {
        None
    };
    Ok(UnitaryMixingDiagnostic {
        n,
        reps,
        label: "PROXY: |E|Tr(Y1...Yk)|^2 - 1| (Haar limit 1); not total variation".into(),
        points,
        proxy_fit,
    })
}
