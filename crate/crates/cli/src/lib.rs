//! Command-line surface for the experiments.
//!
//! Exit codes: 0 when every hard check passes and no statistical verdict
//! fails, 1 for usage or config errors, 2 when a check fails.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use haar_concentration::bounds::{compute_c, BoundInputs};
use haar_concentration::experiments::{
    self, ExperimentConfig, ExperimentKind, ExperimentReport, MixingCurveRequest, MixingGroup, Outcome,
};
use serde_json::{json, Value};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "haarconc", version, about = "Concentration of Haar measure experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for report.json and CSV curves.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Master seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replicate count (overrides the config).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Order n (overrides the config).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroupArg {
    Symmetric,
    Unitary,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fluctuations of the spectral CDF of UMU* + VNV*.
    Matrix {
        #[command(flatten)]
        common: Common,
        /// Also run the one-step rank and CDF-gap check.
        #[arg(long)]
        step_check: bool,
    },
    /// Exact certification on S_n with the lazy transposition walk.
    FiniteGroup {
        #[command(flatten)]
        common: Common,
    },
    /// Exact exchangeable-pair identities on S_n.
    IdentitySuite {
        #[command(flatten)]
        common: Common,
    },
    /// n·Var/log n over a grid of orders.
    Scaling {
        #[command(flatten)]
        common: Common,
        /// Comma-separated orders (overrides the config).
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<usize>>,
    },
    /// Exact TV curve on S_n or the trace-moment proxy on U(n).
    MixingCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "symmetric")]
        group: GroupArg,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Evaluate the concentration constant C.
    BoundCalc {
        /// Upper bound on the sup norm.
        #[arg(long = "A")]
        sup_bound: f64,
        /// Upper bound on the step seminorm.
        #[arg(long = "B")]
        step_bound: f64,
        /// TV envelope prefactor.
        #[arg(long = "a")]
        tv_prefactor: f64,
        /// TV envelope rate.
        #[arg(long = "b")]
        tv_rate: f64,
    },
}

/// Error type that carries its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    }
}

/// Loads the config (if any), applies flag overrides, and validates.
pub fn build_config(kind: ExperimentKind, common: &Common, extra: &[(&str, Value)]) -> anyhow::Result<ExperimentConfig> {
    let mut doc: serde_json::Map<String, Value> = match &common.config {
        Some(path) => {
            let cfg = experiments::parse_config(path)?;
            if cfg.kind != kind {
                bail!("config kind is {} but the command is {}", cfg.kind.name(), kind.name());
            }
            match cfg.to_json_value() {
                Value::Object(m) => m,
                _ => unreachable!("config serializes to an object"),
            }
        }
        None => {
            let mut m = serde_json::Map::new();
            m.insert("kind".into(), json!(kind.name()));
            m
        }
    };
    if let Some(seed) = common.seed {
        doc.insert("seed".into(), json!(seed));
    }
    if let Some(r) = common.replicates {
        doc.insert("replicates".into(), json!(r));
    }
    if let Some(n) = common.n {
        if kind == ExperimentKind::Scaling {
            doc.remove("n");
            doc.insert("n_grid".into(), json!([n]));
        } else {
            doc.insert("n".into(), json!(n));
        }
        // derived defaults follow the new order
        if common.config.is_some() && kind == ExperimentKind::FiniteGroup {
            doc.remove("k_max");
        }
    }
    for (k, v) in extra {
        if *k == "n_grid" {
            doc.remove("n");
        }
        doc.insert((*k).to_string(), v.clone());
    }
    Ok(ExperimentConfig::from_json_str(&Value::Object(doc).to_string())?)
}

fn write_report(report: &ExperimentReport, common: &Common) -> Result<i32, Failure> {
    report
        .write_to(&common.out)
        .with_context(|| format!("writing to {}", common.out.display()))
        .map_err(|e| usage(format!("{e:#}")))?;
    let failed: Vec<&str> = report
        .verdicts
        .iter()
        .filter(|v| v.status == experiments::VerdictStatus::Fail)
        .map(|v| v.name.as_str())
        .collect();
    let inconclusive = report
        .verdicts
        .iter()
        .filter(|v| v.status == experiments::VerdictStatus::Inconclusive)
        .count();
    println!(
        "{} verdicts: {} failed, {} inconclusive; report in {}",
        report.verdicts.len(),
        failed.len(),
        inconclusive,
        common.out.join("report.json").display()
    );
    for name in failed {
        println!("FAIL {name}");
    }
    Ok(match report.outcome() {
        Outcome::Ok => EXIT_OK,
        Outcome::HardFailure | Outcome::StatisticalFailure => EXIT_FAILED,
    })
}

fn run_experiment(kind: ExperimentKind, common: &Common, extra: &[(&str, Value)]) -> Result<i32, Failure> {
    let cfg = build_config(kind, common, extra).map_err(|e| usage(format!("{e:#}")))?;
    let report = in_pool(common.threads, || experiments::run(&cfg)).map_err(usage)?;
    write_report(&report, common)
}

#[cfg(feature = "parallel")]
fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_pool<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

fn check_threads(common: &Common) -> Result<(), Failure> {
    if common.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Matrix { common, step_check } => {
            check_threads(&common)?;
            let extra = if step_check { vec![("step_check", json!(true))] } else { vec![] };
            run_experiment(ExperimentKind::Matrix, &common, &extra)
        }
        Command::FiniteGroup { common } => {
            check_threads(&common)?;
            run_experiment(ExperimentKind::FiniteGroup, &common, &[])
        }
        Command::IdentitySuite { common } => {
            check_threads(&common)?;
            run_experiment(ExperimentKind::IdentitySuite, &common, &[])
        }
        Command::Scaling { common, n_grid } => {
            check_threads(&common)?;
            let extra: Vec<(&str, Value)> = n_grid.map(|g| vec![("n_grid", json!(g))]).unwrap_or_default();
            run_experiment(ExperimentKind::Scaling, &common, &extra)
        }
        Command::MixingCurve { common, group, k_max } => {
            check_threads(&common)?;
            if common.config.is_some() {
                return Err(usage("mixing-curve takes flags only, not --config"));
            }
            let n = common.n.ok_or_else(|| usage("mixing-curve needs --n"))?;
            let seed = common.seed.ok_or_else(|| usage("mixing-curve needs --seed"))?;
            let (group, default_k) = match group {
                GroupArg::Symmetric => (MixingGroup::Symmetric, 40 * n),
                GroupArg::Unitary => (MixingGroup::Unitary, 4 * n),
            };
            let req = MixingCurveRequest {
                group,
                n,
                k_max: k_max.unwrap_or(default_k),
                replicates: common.replicates.unwrap_or(2000),
                seed,
            };
            let report = in_pool(common.threads, || experiments::run_mixing_curve(&req)).map_err(usage)?;
            write_report(&report, &common)
        }
        Command::BoundCalc {
            sup_bound,
            step_bound,
            tv_prefactor,
            tv_rate,
        } => {
            let inputs = BoundInputs::new(sup_bound, step_bound, tv_prefactor, tv_rate).map_err(usage)?;
            let r = compute_c(&inputs);
            println!("C = {:.6}", r.c);
            println!("variance_bound = {:.6}", r.variance_bound);
            println!("beta = {:.6}", r.beta_ratio);
            println!("k0 = {}", r.k0);
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
