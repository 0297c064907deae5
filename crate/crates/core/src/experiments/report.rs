//! Report structure, verdicts and file emission.

use crate::Result;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// A flat table written as CSV with a mandatory header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(name: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        Curve {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    /// NaN becomes an empty field. Integers print without a decimal point;
    /// everything else uses the shortest round-trip form.
    pub fn format_value(v: f64) -> String {
        if v.is_nan() {
            String::new()
        } else if v.fract() == 0.0 && v.abs() < 1e15 {
            format!("{}", v as i64)
        } else {
            format!("{v:?}")
        }
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| Curve::format_value(v)))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Inconclusive,
    Fail,
}

/// One comparison between an observed number and a threshold.
///
/// Hard verdicts are theorem-guaranteed; a failure is a defect. Soft verdicts
/// are statistical and use the 4-SE policy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub hard: bool,
    pub status: VerdictStatus,
    pub observed: f64,
    pub threshold: f64,
    pub relation: String,
}

/// Width of the confidence band used by every statistical verdict.
pub const SE_POLICY: f64 = 4.0;

impl Verdict {
    /// Hard check `observed ≤ threshold`.
    pub fn hard_le(name: impl Into<String>, observed: f64, threshold: f64) -> Self {
        Verdict {
            name: name.into(),
            hard: true,
            status: if observed <= threshold {
                VerdictStatus::Pass
            } else {
                VerdictStatus::Fail
            },
            observed,
            threshold,
            relation: "<=".into(),
        }
    }

    /// Statistical check of `E ≤ threshold` from an estimate with standard
    /// error `se`: pass when the upper limit clears it, fail when the lower
    /// limit exceeds it.
    pub fn stat_le(name: impl Into<String>, estimate: f64, se: f64, threshold: f64) -> Self {
        let status = if estimate + SE_POLICY * se <= threshold {
            VerdictStatus::Pass
        } else if estimate - SE_POLICY * se > threshold {
            VerdictStatus::Fail
        } else {
            VerdictStatus::Inconclusive
        };
        Verdict {
            name: name.into(),
            hard: false,
            status,
            observed: estimate,
            threshold,
            relation: "<= (4 SE)".into(),
        }
    }

    /// Statistical tail check: a frequency at or below the bound passes
    /// outright; above it but within 4 SE is inconclusive.
    pub fn stat_tail(name: impl Into<String>, frequency: f64, se: f64, bound: f64) -> Self {
        let status = if frequency <= bound {
            VerdictStatus::Pass
        } else if frequency - SE_POLICY * se <= bound {
            VerdictStatus::Inconclusive
        } else {
            VerdictStatus::Fail
        };
        Verdict {
            name: name.into(),
            hard: false,
            status,
            observed: frequency,
            threshold: bound,
            relation: "<= (4 SE)".into(),
        }
    }

    /// Statistical agreement `|difference| ≤ 4·se`.
    pub fn stat_agree(name: impl Into<String>, difference: f64, se: f64) -> Self {
        let limit = SE_POLICY * se;
        Verdict {
            name: name.into(),
            hard: false,
            status: if difference.abs() <= limit {
                VerdictStatus::Pass
            } else {
                VerdictStatus::Fail
            },
            observed: difference.abs(),
            threshold: limit,
            relation: "|diff| <= 4 SE".into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment {
    pub seed: u64,
    pub replicates: usize,
    pub version: String,
    /// The only field that varies between identical runs.
    pub runtime_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Every hard check passed and no statistical verdict failed.
    Ok,
    /// A theorem-guaranteed check failed.
    HardFailure,
    /// A statistical verdict failed.
    StatisticalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config_echo: serde_json::Value,
    pub estimates: serde_json::Value,
    pub bounds: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub environment: Environment,
    #[serde(skip)]
    pub curves: Vec<Curve>,
}

impl ExperimentReport {
    pub fn outcome(&self) -> Outcome {
        let failed = |hard: bool| {
            self.verdicts
                .iter()
                .any(|v| v.hard == hard && v.status == VerdictStatus::Fail)
        };
        if failed(true) {
            Outcome::HardFailure
        } else if failed(false) {
            Outcome::StatisticalFailure
        } else {
            Outcome::Ok
        }
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `report.json` and one `<name>.csv` per curve into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json_string())?;
        for c in &self.curves {
            c.write_csv(&dir.join(format!("{}.csv", c.name)))?;
        }
        Ok(())
    }
}

pub(crate) fn environment(seed: u64, replicates: usize, started: std::time::Instant) -> Environment {
    Environment {
        seed,
        replicates,
        version: env!("CARGO_PKG_VERSION").to_string(),
        runtime_seconds: started.elapsed().as_secs_f64(),
    }
}

pub(crate) fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("estimates serialize")
}
