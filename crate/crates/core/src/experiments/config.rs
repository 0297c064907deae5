//! Declarative experiment configuration.
//!
//! A config file is parsed into [`RawConfig`] (every key optional, unknown
//! keys rejected) and then validated into [`ExperimentConfig`], where all
//! defaults are explicit. Serializing an `ExperimentConfig` gives its
//! canonical form, which parses back to the same value.

use crate::kernel::MAX_EXACT_DEGREE;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Matrix,
    FiniteGroup,
    IdentitySuite,
    Scaling,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Matrix => "matrix",
            ExperimentKind::FiniteGroup => "finite-group",
            ExperimentKind::IdentitySuite => "identity-suite",
            ExperimentKind::Scaling => "scaling",
        }
    }

    fn default_replicates(self) -> usize {
        match self {
            ExperimentKind::Matrix => 1000,
            ExperimentKind::FiniteGroup => 10_000,
            ExperimentKind::IdentitySuite => 50,
            ExperimentKind::Scaling => 2000,
        }
    }

    fn default_t_grid(self) -> Vec<f64> {
        match self {
            ExperimentKind::Matrix | ExperimentKind::Scaling => vec![0.02, 0.05, 0.1, 0.15, 0.2],
            ExperimentKind::FiniteGroup => vec![0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0],
            ExperimentKind::IdentitySuite => Vec::new(),
        }
    }
}

/// Named spectrum generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumGenerator {
    /// `⌊n/2⌋` eigenvalues at −1, the rest at +1.
    TwoPoint,
    /// `n` equally spaced points on [−1, 1].
    UniformGrid,
    /// All zero.
    Zero,
    /// Independent standard normals, redrawn every replicate.
    Gaussian,
}

impl SpectrumGenerator {
    fn parse(name: &str) -> Option<Self> {
        match name {
            "two_point" => Some(Self::TwoPoint),
            "uniform_grid" => Some(Self::UniformGrid),
            "zero" => Some(Self::Zero),
            "gaussian" => Some(Self::Gaussian),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumSpec {
    Values(Vec<f64>),
    Named(SpectrumGenerator),
}

impl SpectrumSpec {
    /// Eigenvalues for order `n`. Only the gaussian generator draws from `rng`.
    pub fn resolve<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            SpectrumSpec::Values(v) => {
                if v.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: v.len(),
                    });
                }
                Ok(v.clone())
            }
            SpectrumSpec::Named(g) => Ok(match g {
                SpectrumGenerator::TwoPoint => (0..n).map(|i| if i < n / 2 { -1.0 } else { 1.0 }).collect(),
                SpectrumGenerator::UniformGrid => {
                    if n == 1 {
                        vec![0.0]
                    } else {
                        (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
                    }
                }
                SpectrumGenerator::Zero => vec![0.0; n],
                SpectrumGenerator::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            }),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, SpectrumSpec::Named(SpectrumGenerator::Gaussian))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum RawSpectrum {
    Values(Vec<f64>),
    Named(String),
}

/// Config as written by a user: every key optional, unknown keys rejected.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    kind: Option<String>,
    n: Option<usize>,
    n_grid: Option<Vec<usize>>,
    spectrum_m: Option<RawSpectrum>,
    spectrum_n: Option<RawSpectrum>,
    x_grid: Option<Vec<f64>>,
    replicates: Option<usize>,
    seed: Option<u64>,
    kappa: Option<f64>,
    t_grid: Option<Vec<f64>>,
    step_check: Option<bool>,
    k_max: Option<usize>,
    reduced_form: Option<bool>,
    num_functions: Option<usize>,
}

fn take<T: DeserializeOwned>(doc: &mut Map<String, Value>, key: &str) -> Result<Option<T>> {
    match doc.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v)
            .map(Some)
            .map_err(|e| Error::config(key, e.to_string())),
    }
}

impl RawConfig {
    /// Reads the known keys one at a time so that every error names its key.
    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(mut doc) = value else {
            return Err(Error::config("<document>", "config must be a JSON object"));
        };
        let raw = RawConfig {
            kind: take(&mut doc, "kind")?,
            n: take(&mut doc, "n")?,
            n_grid: take(&mut doc, "n_grid")?,
            spectrum_m: take(&mut doc, "spectrum_M")?,
            spectrum_n: take(&mut doc, "spectrum_N")?,
            x_grid: take(&mut doc, "x_grid")?,
            replicates: take(&mut doc, "replicates")?,
            seed: take(&mut doc, "seed")?,
            kappa: take(&mut doc, "kappa")?,
            t_grid: take(&mut doc, "t_grid")?,
            step_check: take(&mut doc, "step_check")?,
            k_max: take(&mut doc, "k_max")?,
            reduced_form: take(&mut doc, "reduced_form")?,
            num_functions: take(&mut doc, "num_functions")?,
        };
        if let Some(key) = doc.keys().next() {
            return Err(Error::config(key.as_str(), "unknown key"));
        }
        Ok(raw)
    }
}

/// A fully validated configuration with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Orders to run. A single entry for every kind except `scaling`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(rename = "spectrum_M")]
    pub spectrum_m: SpectrumSpec,
    #[serde(rename = "spectrum_N")]
    pub spectrum_n: SpectrumSpec,
    pub x_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub kappa: f64,
    pub t_grid: Vec<f64>,
    pub step_check: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    pub reduced_form: bool,
    /// Random test functions besides the fixed-point fraction (finite-group only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_functions: Option<usize>,
}

impl<'de> Deserialize<'de> for ExperimentConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ExperimentConfig::from_json_value(v).map_err(serde::de::Error::custom)
    }
}

fn default_x_grid() -> Vec<f64> {
    vec![-1.0, -0.5, 0.0, 0.5, 1.0]
}

fn check_spectrum(key: &str, raw: Option<RawSpectrum>, orders: &[usize]) -> Result<SpectrumSpec> {
    let spec = match raw {
        None => SpectrumSpec::Named(SpectrumGenerator::TwoPoint),
        Some(RawSpectrum::Named(name)) => SpectrumSpec::Named(SpectrumGenerator::parse(&name).ok_or_else(|| {
            Error::config(
                key,
                format!("unknown generator {name:?}; expected an array or one of two_point, uniform_grid, zero, gaussian"),
            )
        })?),
        Some(RawSpectrum::Values(v)) => {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::config(key, "eigenvalues must be finite"));
            }
            if let Some(&bad) = orders.iter().find(|&&n| n != v.len()) {
                return Err(Error::config(key, format!("has {} eigenvalues but n = {bad}", v.len())));
            }
            SpectrumSpec::Values(v)
        }
    };
    Ok(spec)
}

fn check_grid(key: &str, grid: &[f64], non_negative: bool) -> Result<()> {
    for &v in grid {
        if !v.is_finite() || (non_negative && v < 0.0) {
            return Err(Error::config(key, format!("invalid entry {v}")));
        }
    }
    Ok(())
}

impl TryFrom<RawConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let kind = match raw.kind.as_deref() {
            None => return Err(Error::config("kind", "missing")),
            Some("matrix") => ExperimentKind::Matrix,
            Some("finite-group") => ExperimentKind::FiniteGroup,
            Some("identity-suite") => ExperimentKind::IdentitySuite,
            Some("scaling") => ExperimentKind::Scaling,
            Some(other) => {
                return Err(Error::config(
                    "kind",
                    format!("unknown kind {other:?}; expected matrix, finite-group, identity-suite or scaling"),
                ))
            }
        };
        let seed = raw.seed.ok_or_else(|| Error::config("seed", "missing (no ambient randomness)"))?;

        let (n, n_grid) = match kind {
            ExperimentKind::Scaling => {
                let grid = match (raw.n, raw.n_grid) {
                    (Some(_), Some(_)) => return Err(Error::config("n_grid", "give either n or n_grid, not both")),
                    (Some(n), None) => vec![n],
                    (None, Some(g)) => g,
                    (None, None) => return Err(Error::config("n_grid", "missing")),
                };
                if grid.is_empty() {
                    return Err(Error::config("n_grid", "grid is empty"));
                }
                if let Some(&bad) = grid.iter().find(|&&n| n < 2) {
                    return Err(Error::config("n_grid", format!("orders must be >= 2, got {bad}")));
                }
                (None, Some(grid))
            }
            _ => {
                if raw.n_grid.is_some() {
                    return Err(Error::config("n_grid", format!("only valid for kind scaling, not {}", kind.name())));
                }
                let n = raw.n.ok_or_else(|| Error::config("n", "missing"))?;
                let (lo, hi) = match kind {
                    ExperimentKind::FiniteGroup => (3, MAX_EXACT_DEGREE),
                    ExperimentKind::IdentitySuite => (2, 5),
                    _ => (2, usize::MAX),
                };
                if n < lo || n > hi {
                    return Err(Error::config("n", format!("{} needs {lo} <= n <= {hi}, got {n}", kind.name())));
                }
                (Some(n), None)
            }
        };
        let orders: Vec<usize> = n_grid.clone().unwrap_or_else(|| vec![n.unwrap_or(0)]);

        let spectrum_m = check_spectrum("spectrum_M", raw.spectrum_m, &orders)?;
        let spectrum_n = check_spectrum("spectrum_N", raw.spectrum_n, &orders)?;

        let x_grid = raw.x_grid.unwrap_or_else(default_x_grid);
        if x_grid.is_empty() {
            return Err(Error::config("x_grid", "grid is empty"));
        }
        check_grid("x_grid", &x_grid, false)?;

        let replicates = raw.replicates.unwrap_or_else(|| kind.default_replicates());
        if replicates < 1 {
            return Err(Error::config("replicates", "must be >= 1"));
        }

        let kappa = raw.kappa.unwrap_or(1.0);
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::config("kappa", format!("must be positive and finite, got {kappa}")));
        }

        let t_grid = raw.t_grid.unwrap_or_else(|| kind.default_t_grid());
        check_grid("t_grid", &t_grid, true)?;

        let step_check = raw.step_check.unwrap_or(false);
        if step_check && kind != ExperimentKind::Matrix {
            return Err(Error::config("step_check", "only valid for kind matrix"));
        }
        let reduced_form = raw.reduced_form.unwrap_or(false);
        if reduced_form && !matches!(kind, ExperimentKind::Matrix | ExperimentKind::Scaling) {
            return Err(Error::config("reduced_form", "only valid for kinds matrix and scaling"));
        }

        let k_max = match kind {
            ExperimentKind::FiniteGroup => {
                let k = raw.k_max.unwrap_or(40 * n.unwrap_or(0));
                if k < 1 {
                    return Err(Error::config("k_max", "must be >= 1"));
                }
                Some(k)
            }
            _ => {
                if raw.k_max.is_some() {
                    return Err(Error::config("k_max", "only valid for kind finite-group"));
                }
                None
            }
        };
        let num_functions = match kind {
            ExperimentKind::FiniteGroup => Some(raw.num_functions.unwrap_or(20)),
            _ => {
                if raw.num_functions.is_some() {
                    return Err(Error::config("num_functions", "only valid for kind finite-group"));
                }
                None
            }
        };

        Ok(ExperimentConfig {
            kind,
            n,
            n_grid,
            spectrum_m,
            spectrum_n,
            x_grid,
            replicates,
            seed,
            kappa,
            t_grid,
            step_check,
            k_max,
            reduced_form,
            num_functions,
        })
    }
}

impl ExperimentConfig {
    /// The orders this config runs at, in order.
    pub fn orders(&self) -> Vec<usize> {
        match (&self.n_grid, self.n) {
            (Some(g), _) => g.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        }
    }

    /// The single order of a non-scaling config.
    pub fn order(&self) -> Result<usize> {
        self.n
            .ok_or_else(|| Error::config("n", format!("kind {} has no single order", self.kind.name())))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        ExperimentConfig::from_json_value(value)
    }

    pub fn from_json_value(value: Value) -> Result<Self> {
        ExperimentConfig::try_from(RawConfig::from_value(value)?)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub(crate) fn require_kind(&self, kind: ExperimentKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::config(
                "kind",
                format!("expected {}, got {}", kind.name(), self.kind.name()),
            ));
        }
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        key: "<file>".to_string(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    ExperimentConfig::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_matrix_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json_str(r#"{"kind":"matrix","n":8,"replicates":100,"seed":1}"#).unwrap();
        assert_eq!(cfg.spectrum_m, SpectrumSpec::Named(SpectrumGenerator::TwoPoint));
        assert_eq!(cfg.spectrum_n, SpectrumSpec::Named(SpectrumGenerator::TwoPoint));
        assert_eq!(cfg.x_grid, default_x_grid());
        assert_eq!(cfg.kappa, 1.0);
        assert!(!cfg.step_check);
    }

    #[test]
    fn spectrum_length_mismatch_names_key() {
        let err = ExperimentConfig::from_json_str(r#"{"kind":"matrix","n":4,"seed":1,"spectrum_M":[1,2,3]}"#).unwrap_err();
        assert!(err.to_string().contains("spectrum_M"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = ExperimentConfig::from_json_str(r#"{"kind":"matrix","n":4,"seed":1,"colour":3}"#).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn seed_is_required() {
        let err = ExperimentConfig::from_json_str(r#"{"kind":"matrix","n":4}"#).unwrap_err();
        assert!(err.to_string().contains("seed"));
    }

    #[test]
    fn canonical_form_round_trips() {
        let cfg = ExperimentConfig::from_json_str(r#"{"kind":"finite-group","n":5,"seed":3}"#).unwrap();
        let text = cfg.to_json_string();
        assert_eq!(ExperimentConfig::from_json_str(&text).unwrap(), cfg);
        assert_eq!(cfg.k_max, Some(200));
    }

    #[test]
    fn generators() {
        let mut rng = crate::rng::stream(0, "config-test", 0);
        let two = SpectrumSpec::Named(SpectrumGenerator::TwoPoint).resolve(5, &mut rng).unwrap();
        assert_eq!(two, vec![-1.0, -1.0, 1.0, 1.0, 1.0]);
        let grid = SpectrumSpec::Named(SpectrumGenerator::UniformGrid).resolve(3, &mut rng).unwrap();
        assert_eq!(grid, vec![-1.0, 0.0, 1.0]);
    }
}
