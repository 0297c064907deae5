//! The concentration constant and the bounds it yields.
//!
//! For `‖f‖∞ ≤ A`, `‖f‖_Y ≤ B` and `d_TV(Y₁⋯Y_k, X) ≤ a e^{−bk}`,
//!
//! ```text
//! C = (B²/b) [ (log 4aA/B)⁺ + b / (1 − e^{−b}) ],
//! Var f(X) ≤ C/2,   P(|f(X)| ≥ t) ≤ 2 e^{−t²/C}.
//! ```

use crate::groups::GroupElement;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Hypotheses of the concentration bound. All four must be upper bounds
/// (for `A`, `B`) or a dominating envelope (for `a`, `b`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `A ≥ ‖f‖∞`.
    #[serde(rename = "A")]
    pub sup_bound: f64,
    /// `B ≥ ‖f‖_Y`.
    #[serde(rename = "B")]
    pub step_bound: f64,
    /// TV envelope prefactor `a`.
    #[serde(rename = "a")]
    pub tv_prefactor: f64,
    /// TV envelope rate `b` (per step).
    #[serde(rename = "b")]
    pub tv_rate: f64,
}

impl BoundInputs {
    pub fn new(sup_bound: f64, step_bound: f64, tv_prefactor: f64, tv_rate: f64) -> Result<Self> {
        for (name, v) in [("A", sup_bound), ("B", step_bound), ("a", tv_prefactor), ("b", tv_rate)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        // |f(x) − f(Yx)| ≤ 2‖f‖∞ forces B ≤ 2A for tight bounds.
        if step_bound > 2.0 * sup_bound * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "B = {step_bound} exceeds 2A = {}",
                2.0 * sup_bound
            )));
        }
        Ok(BoundInputs {
            sup_bound,
            step_bound,
            tv_prefactor,
            tv_rate,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    #[serde(rename = "C")]
    pub c: f64,
    /// `C/2`.
    pub variance_bound: f64,
    /// `β = 4aA/B`.
    pub beta_ratio: f64,
    /// `γ = b⁻¹ log β`, clamped at 0.
    pub gamma: f64,
    /// `⌈γ⌉`.
    pub k0: u64,
}

pub fn compute_c(inputs: &BoundInputs) -> BoundResult {
    let BoundInputs {
        sup_bound: a_sup,
        step_bound: b_step,
        tv_prefactor: a,
        tv_rate: b,
    } = *inputs;
    let beta_ratio = 4.0 * a * a_sup / b_step;
    let log_plus = beta_ratio.ln().max(0.0);
    let gamma = log_plus / b;
    // b / (1 − e^{−b}) without cancellation for small b
    let geometric = b / -(-b).exp_m1();
    let c = b_step * b_step / b * (log_plus + geometric);
    BoundResult {
        c,
        variance_bound: c / 2.0,
        beta_ratio,
        gamma,
        k0: gamma.ceil() as u64,
    }
}

/// `2 e^{−t²/C}`, unclamped. `t = 0` gives 2 for any `C ≥ 0`; `C = 0` with
/// `t > 0` gives 0 (the function is a.s. constant).
pub fn tail_bound(c: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t must be non-negative, got {t}")));
    }
    if !(c >= 0.0) {
        return Err(Error::invalid(format!("C must be non-negative, got {c}")));
    }
    if t == 0.0 {
        return Ok(2.0);
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * (-t * t / c).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    /// `κ log n / n`.
    pub variance_bound: f64,
    /// `2 exp(−n t² / (2κ log n))`.
    pub tail: f64,
}

/// Variance and tail bounds for `F_H(x)` at order `n` with constant `κ`.
///
/// The tail is evaluated as [`tail_bound`] at `C = 2κ log n / n`, so the two
/// agree exactly.
pub fn theorem1_bounds(n: usize, kappa: f64, t: f64) -> Result<SpectralBounds> {
    if n < 2 {
        return Err(Error::invalid(format!("spectral bounds need n >= 2, got {n}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let nf = n as f64;
    let variance_bound = kappa * nf.ln() / nf;
    Ok(SpectralBounds {
        variance_bound,
        tail: tail_bound(2.0 * variance_bound, t)?,
    })
}

/// `κ` for which `κ log n / n` equals the variance bound `C/2`.
pub fn implied_kappa(n: usize, c: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok(c / 2.0 * nf / nf.ln())
}

/// Empirical estimates of `‖f‖∞` and `‖f‖_Y`.
///
/// Both are maxima over finitely many probes and therefore LOWER estimates of
/// the true suprema; they cannot certify the concentration bound, which needs
/// upper bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimates {
    pub sup_estimate: f64,
    pub step_estimate: f64,
    /// Delta-method standard error of the maximizing probe's RMS.
    pub step_estimate_se: f64,
    pub probes: usize,
    pub reps: usize,
    pub sup_is_lower_estimate: bool,
    pub step_is_lower_estimate: bool,
}

pub const MIN_NORM_REPS: usize = 100;
pub const MIN_NORM_PROBES: usize = 10;

/// Estimate `(A_hat, B_hat)` for a black-box `f` from probe points `x` and
/// `reps` fresh steps `Y` per probe (`B_hat` uses `f(x) − f(Yx)`).
pub fn estimate_f_norms<E, F, S, R>(mut f: F, mut step: S, probes: &[E], reps: usize, rng: &mut R) -> Result<NormEstimates>
where
    E: GroupElement,
    F: FnMut(&E) -> Result<f64>,
    S: FnMut(&mut R) -> Result<E>,
    R: Rng + ?Sized,
{
    if reps < MIN_NORM_REPS {
        return Err(Error::invalid(format!("need at least {MIN_NORM_REPS} reps, got {reps}")));
    }
    if probes.len() < MIN_NORM_PROBES {
        return Err(Error::invalid(format!(
            "need at least {MIN_NORM_PROBES} probe points, got {}",
            probes.len()
        )));
    }
    let mut sup_estimate = 0.0f64;
    let mut step_estimate = 0.0f64;
    let mut step_estimate_se = 0.0f64;
    for x in probes {
        let fx = f(x)?;
        sup_estimate = sup_estimate.max(fx.abs());
        let mut sq = Vec::with_capacity(reps);
        for _ in 0..reps {
            let y = step(rng)?;
            let fyx = f(&y.compose(x)?)?;
            sq.push((fx - fyx).powi(2));
        }
        let s = crate::stats::Summary::of(&sq);
        let rms = s.mean.sqrt();
        if rms > step_estimate || (rms == step_estimate && step_estimate == 0.0) {
            step_estimate = rms;
            step_estimate_se = if rms > 0.0 { s.mean_se / (2.0 * rms) } else { 0.0 };
        }
    }
    Ok(NormEstimates {
        sup_estimate,
        step_estimate,
        step_estimate_se,
        probes: probes.len(),
        reps,
        sup_is_lower_estimate: true,
        step_is_lower_estimate: true,
    })
}
