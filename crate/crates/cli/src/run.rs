//! The `run` verb: claims in sequence, then every report file at once.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::json;
use zetagrid::cache::{CacheLock, ZetaCache};
use zetagrid::meanvalue::report::fmt15;
use zetagrid::meanvalue::{ClaimContext, ClaimId, MeanValueReport};
use zetagrid::special_fn::ZetaEvaluator;

use crate::config::ExperimentConfig;

/// One claim at one k.
pub struct ClaimResult {
    pub claim: ClaimId,
    pub k: u32,
    pub outcome: std::result::Result<MeanValueReport, String>,
    /// (file stem, CSV) for plotting
    pub tables: Vec<(String, String)>,
}

impl ClaimResult {
    pub fn stem(&self) -> String {
        format!("{}_k{}", self.claim, self.k)
    }
}

pub struct RunSummary {
    pub results: Vec<ClaimResult>,
    pub fresh_evaluations: u64,
    pub cache_entries: usize,
}

impl RunSummary {
    pub fn failed(&self) -> usize {
        self.results.iter().filter(|r| r.outcome.as_ref().is_ok_and(|r| !r.passed)).count()
    }

    pub fn errored(&self) -> usize {
        self.results.iter().filter(|r| r.outcome.is_err()).count()
    }
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Runs every configured claim and writes the reports. A claim that
/// cannot be computed is listed in the summary and skipped; it does not
/// stop the others.
pub fn run(cfg: &ExperimentConfig, cache_path: Option<&Path>, config_source: &str, threads: Option<usize>) -> Result<RunSummary> {
    cfg.validate()?;
    let started = unix_seconds();
    let _lock = cache_path.map(CacheLock::acquire).transpose().context("locking the cache")?;
    let (cache, stats) = match cache_path {
        Some(p) => ZetaCache::load(p).with_context(|| format!("loading cache {}", p.display()))?,
        None => (ZetaCache::new(), Default::default()),
    };
    if stats.skipped > 0 {
        eprintln!("warning: skipped {} corrupt cache lines", stats.skipped);
    }
    let zeta = ZetaEvaluator::with_cache(cfg.precision, Arc::new(cache))?;

    let mut results = Vec::new();
    for k in cfg.ks() {
        let mut ctx = ClaimContext::new(cfg.grid_params(k)?, &zeta);
        ctx.taus = cfg.tau_list.clone();
        ctx.quad_order = cfg.quad_order;
        ctx.bands = cfg.band_overrides();
        ctx.residual_ladder = cfg.residual.ladder.clone();
        ctx.residual_samples = cfg.residual.samples;
        ctx.tau_samples = cfg.tau_samples;
        for &claim in &cfg.claims {
            let (outcome, tables) = match ctx.run(claim) {
                Ok(out) => (Ok(out.report), out.tables),
                Err(e) => (Err(e.to_string()), Vec::new()),
            };
            let r = ClaimResult { claim, k, outcome, tables };
            eprintln!("{}", status_line(&r));
            results.push(r);
        }
    }

    if let Some(p) = cache_path {
        zeta.cache().store(p).with_context(|| format!("writing cache {}", p.display()))?;
    }
    let summary = RunSummary { results, fresh_evaluations: zeta.fresh_evaluations(), cache_entries: zeta.cache().len() };
    write_outputs(cfg, &summary)?;
    let meta = json!({
        "config": config_source,
        "started_unix": started,
        "finished_unix": unix_seconds(),
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "cache_path": cache_path.map(|p| p.display().to_string()),
        "cache_lines_loaded": stats.loaded,
        "cache_lines_skipped": stats.skipped,
        "cache_entries": summary.cache_entries,
        "fresh_zeta_evaluations": summary.fresh_evaluations,
    });
    fs::write(cfg.output_dir.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(summary)
}

fn status_line(r: &ClaimResult) -> String {
    match &r.outcome {
        Ok(rep) if rep.passed => format!("PASS {:<13} k={} ratio={}", r.claim.as_str(), r.k, fmt15(rep.ratio)),
        Ok(rep) => format!("FAIL {:<13} k={} ratio={} failed checks: {:?}", r.claim.as_str(), r.k, fmt15(rep.ratio), rep.failed_checks()),
        Err(e) => format!("ERROR {:<12} k={} {e}", r.claim.as_str(), r.k),
    }
}

fn write_outputs(cfg: &ExperimentConfig, s: &RunSummary) -> Result<()> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut plots: Vec<PathBuf> = Vec::new();
    let mut csv = String::from(MeanValueReport::CSV_HEADER);
    csv.push('\n');
    for r in &s.results {
        if let Ok(rep) = &r.outcome {
            let text = serde_json::to_string_pretty(&rep.to_json())? + "\n";
            fs::write(dir.join(format!("{}.json", r.stem())), text)?;
            csv += &rep.csv_row();
            csv.push('\n');
        }
        for (name, table) in &r.tables {
            let file = PathBuf::from(format!("{name}_k{}.csv", r.k));
            fs::write(dir.join(&file), table)?;
            plots.push(file);
        }
    }
    fs::write(dir.join("summary.csv"), csv)?;
    fs::write(dir.join("summary.txt"), summary_table(&s.results))?;
    fs::write(dir.join("plot.gp"), plot_script(&plots))?;
    Ok(())
}

pub fn summary_table(results: &[ClaimResult]) -> String {
    let mut out = format!("{:<14}{:>3} {:>10} {:>22} {:>22} {:>18} {:>22}  {}\n", "claim", "k", "tau", "computed", "main_term", "ratio", "band", "status");
    for r in results {
        match &r.outcome {
            Ok(rep) => {
                let band = rep.band.map_or("-".to_string(), |b| format!("[{}, {}]", fmt15(b.lo), fmt15(b.hi)));
                let tau = rep.tau.map_or("-".to_string(), |t| format!("{t:.6}"));
                let status = if rep.passed { "PASS".to_string() } else { format!("FAIL {}", rep.failed_checks().join(" ")) };
                let _ = writeln!(
                    out,
                    "{:<14}{:>3} {:>10} {:>22} {:>22} {:>18} {:>22}  {}",
                    r.claim.as_str(),
                    r.k,
                    tau,
                    fmt15(rep.computed),
                    fmt15(rep.main_term),
                    format!("{:.12}", rep.ratio),
                    band,
                    status.trim_end()
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{:<14}{:>3}  ERROR {e}", r.claim.as_str(), r.k);
            }
        }
    }
    out
}

/// gnuplot script turning the plot-data CSVs and the summary into PNGs.
pub fn plot_script(tables: &[PathBuf]) -> String {
    let mut s = String::from(
        "# gnuplot plot.gp  (run inside this directory)\n\
         set datafile separator ','\n\
         set terminal pngcairo size 1000,640\n\
         set key autotitle columnhead\n\n\
         set output 'ratios.png'\n\
         set title 'computed / main term'\n\
         set xtics rotate by -45\n\
         set yrange [0:*]\n\
         plot 'summary.csv' using 0:10:xtic(stringcolumn(1).'_k'.stringcolumn(5)) with points pt 7 title 'ratio', \\\n\
         \x20    '' using 0:13 with points pt 2 title 'band lo', '' using 0:14 with points pt 2 title 'band hi'\n\
         unset xtics; set xtics; set autoscale y\n",
    );
    for t in tables {
        let name = t.display().to_string();
        let png = name.trim_end_matches(".csv").to_string() + ".png";
        if name.starts_with("residuals") {
            let _ = write!(
                s,
                "\nset output '{png}'\nset title 'Dirichlet-polynomial residual'\nset logscale y\nset xlabel 't'\n\
                 plot '{name}' using 2:3 with points pt 7 ps 0.5 title 'residual'\nunset logscale y\nunset xlabel\n"
            );
        } else if name.starts_with("expsum") {
            let _ = write!(
                s,
                "\nset output '{png}'\nset title 'cosine sums / (ln T / ln freq)'\nset xlabel 'row'\n\
                 plot '{name}' using 0:(abs($5)/$6) with points pt 7 ps 0.5 title '|sum| / scale'\nunset xlabel\n"
            );
        }
    }
    s
}

/// Reads every report in `dir` (metadata excluded), in file-name order.
pub fn read_reports(dir: &Path) -> Result<Vec<(String, MeanValueReport)>> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "metadata.json"))
        .collect();
    names.sort();
    let mut out = Vec::new();
    for p in names {
        let text = fs::read_to_string(&p)?;
        let rep: MeanValueReport = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        out.push((p.file_stem().unwrap_or_default().to_string_lossy().into_owned(), rep));
    }
    Ok(out)
}
