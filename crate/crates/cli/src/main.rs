//! `zetagrid`: runs mean-value experiments over θ-grid sets and exposes the
//! underlying special functions for spot checks.
//!
//! Exit status: 0 when every claim passes, 1 when a claim fails its band or
//! checks, 2 on configuration or infrastructure errors.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use zetagrid::divisor::{d_omega, f_series};
use zetagrid::grid::{solve_grid_point, Preset};
use zetagrid::meanvalue::report::{fmt15, round_json};
use zetagrid::meanvalue::{Band, ClaimId};
use zetagrid::special_fn::{theta, zeta, ComplexPoint, EvalPrecision};

use config::ExperimentConfig;

const EXIT_CLAIM_FAILURE: u8 = 1;
const EXIT_INFRASTRUCTURE: u8 = 2;

/// Cache file used when neither `--cache` nor the config names one.
const CACHE_ENV: &str = "ZETAGRID_CACHE";

#[derive(Parser)]
#[command(name = "zetagrid", version, about = "Mean values of zeta over theta-grid sets")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the claims of an experiment config and write reports.
    Run {
        /// JSON config; optional when --preset is given.
        config: Option<PathBuf>,
        /// Zeta cache file [default: $ZETAGRID_CACHE].
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Override an acceptance band, e.g. --band lemma2=0.8,1.2 (repeatable).
        #[arg(long, value_parser = parse_band)]
        band: Vec<(ClaimId, Band)>,
        /// Shipped parameter set (T1e5, T1e6, T1e7, T1e8); with a config,
        /// replaces its preset.
        #[arg(long)]
        preset: Option<Preset>,
        /// Replaces the config's output_dir.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Riemann–Siegel theta θ(t).
    Theta { t: f64 },
    /// The grid root t_ν(τ) of θ(t) = πν + τ.
    Gram {
        #[arg(allow_hyphen_values = true)]
        nu: i64,
        #[arg(allow_hyphen_values = true)]
        tau: f64,
    },
    /// ζ(σ + it).
    Zeta {
        #[arg(allow_hyphen_values = true)]
        sigma: f64,
        #[arg(allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Generalized divisor function d_k(n); k may be fractional.
    Dk { k: f64, n: u64 },
    /// F(σ, ω) = Σ d_ω(n)² n^(−2σ) with its truncation bound.
    Fseries {
        sigma: f64,
        omega: f64,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
    },
    /// Summarize the JSON reports in a directory; exits 1 if any failed.
    ReportSummary { dir: PathBuf },
}

fn parse_band(s: &str) -> Result<(ClaimId, Band), String> {
    let (claim, range) = s.split_once('=').ok_or("expected claim=lo,hi")?;
    let claim: ClaimId = claim.parse().map_err(|e| format!("{e}"))?;
    let band: Band = range.parse().map_err(|e| format!("{e}"))?;
    if !(band.lo < band.hi) {
        return Err(format!("band lo must be below hi, got {range}"));
    }
    Ok((claim, band))
}

fn print_json(mut v: Value) {
    round_json(&mut v);
    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 || !zetagrid::par::init_threads(n) {
            eprintln!("warning: could not set thread count to {n}");
        }
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INFRASTRUCTURE)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Run { config, cache, band, preset, output } => {
            let (mut cfg, source) = match (&config, preset) {
                (Some(path), _) => (ExperimentConfig::load(path)?, path.display().to_string()),
                (None, Some(p)) => (ExperimentConfig::for_preset(p), format!("preset {p}")),
                (None, None) => bail!("run needs a config file or --preset"),
            };
            if config.is_some() && preset.is_some() {
                cfg.preset = preset;
            }
            for (c, b) in band {
                cfg.bands.insert(c, [b.lo, b.hi]);
            }
            if let Some(o) = output {
                cfg.output_dir = o;
            }
            let cache = cache.or_else(|| cfg.cache_path.clone()).or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
            let summary = run::run(&cfg, cache.as_deref(), &source, cli.threads)?;
            eprintln!(
                "{} claims: {} failed, {} errors; {} fresh zeta evaluations; reports in {}",
                summary.results.len(),
                summary.failed(),
                summary.errored(),
                summary.fresh_evaluations,
                cfg.output_dir.display()
            );
            Ok(if summary.errored() > 0 {
                EXIT_INFRASTRUCTURE
            } else if summary.failed() > 0 {
                EXIT_CLAIM_FAILURE
            } else {
                0
            })
        }
        Cmd::Theta { t } => {
            print_json(json!({ "t": t, "theta": theta(t)? }));
            Ok(0)
        }
        Cmd::Gram { nu, tau } => {
            print_json(serde_json::to_value(solve_grid_point(nu, tau)?)?);
            Ok(0)
        }
        Cmd::Zeta { sigma, t, tol } => {
            let prec = EvalPrecision { target_abs_tol: tol, ..Default::default() };
            let z = zeta(ComplexPoint::new(sigma, t), &prec)?;
            print_json(json!({ "sigma": sigma, "t": t, "re": z.re, "im": z.im, "abs": z.norm() }));
            Ok(0)
        }
        Cmd::Dk { k, n } => {
            print_json(json!({ "k": k, "n": n, "d": d_omega(k, n)? }));
            Ok(0)
        }
        Cmd::Fseries { sigma, omega, rel_tol } => {
            print_json(serde_json::to_value(f_series(sigma, omega, rel_tol)?)?);
            Ok(0)
        }
        Cmd::ReportSummary { dir } => {
            let reports = run::read_reports(&dir).with_context(|| format!("summarizing {}", dir.display()))?;
            if reports.is_empty() {
                bail!("no reports in {}", dir.display());
            }
            let mut failed = 0;
            for (name, r) in &reports {
                failed += usize::from(!r.passed);
                let band = r.band.map_or("-".into(), |b| format!("[{}, {}]", fmt15(b.lo), fmt15(b.hi)));
                println!("{:<4} {name:<20} ratio={:<20} band={band}", if r.passed { "PASS" } else { "FAIL" }, fmt15(r.ratio));
            }
            println!("{} reports, {failed} failed", reports.len());
            Ok(if failed > 0 { EXIT_CLAIM_FAILURE } else { 0 })
        }
    }
}
