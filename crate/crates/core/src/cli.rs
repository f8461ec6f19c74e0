//! The `run`, `optimize` and `sweep` commands behind the binary.
//!
//! Every command reads a [`ScenarioConfig`], writes its artifacts under the
//! output directory with deterministic names and returns what it wrote.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::simulation::{run_closed_loop, sweep_sampling_times, ts_millis, Summary, SweepRow};
use crate::trajectory::{optimize_minimax_acceleration, polynomial_initializer, OptimizationReport, ReferenceTrajectory};

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub ts: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summaries: Vec<Summary>,
    pub files: Vec<PathBuf>,
    pub table: String,
}

impl RunOutcome {
    pub fn all_completed(&self) -> bool {
        self.summaries.iter().all(|s| s.completed)
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub report: OptimizationReport,
    pub files: Vec<PathBuf>,
    pub run: Option<RunOutcome>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub files: Vec<PathBuf>,
    pub table: String,
}

/// Config with the command-line overrides applied; this is what gets echoed.
fn effective(config: &Path, options: &Options) -> Result<(ScenarioConfig, PathBuf)> {
    let mut cfg = ScenarioConfig::load(config)?;
    if let Some(ts) = options.ts {
        cfg.simulation.ts = ts;
    }
    if let Some(seed) = options.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(out) = &options.out {
        cfg.output.dir = out.clone();
    }
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    Ok((cfg, dir))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct OptimizerDigest {
    epsilon: f64,
    initial_epsilon: f64,
    iterations: usize,
    termination: String,
}

impl From<&OptimizationReport> for OptimizerDigest {
    fn from(r: &OptimizationReport) -> Self {
        Self {
            epsilon: r.epsilon,
            initial_epsilon: r.initial_epsilon,
            iterations: r.iterations,
            termination: r.termination.clone(),
        }
    }
}

#[derive(Serialize)]
struct Comparison {
    controller: String,
    max_error: f64,
    /// Max error relative to the first configured law.
    ratio: f64,
}

#[derive(Serialize)]
struct RunSummaryFile<'a> {
    config: &'a ScenarioConfig,
    optimizer: Option<OptimizerDigest>,
    runs: &'a [Summary],
    comparison: Vec<Comparison>,
}

/// Fixed-width metric table, one line per run.
pub fn summary_table(summaries: &[Summary]) -> String {
    let mut s = format!(
        "{:<14} {:>7} {:>9} {:>12} {:>12} {:>20} {:>20}\n",
        "controller", "ts[ms]", "status", "max err[m]", "final err[m]", "F range[N]", "M range[Nm]"
    );
    for r in summaries {
        let status = if r.completed { "ok" } else { "diverged" };
        let _ = writeln!(
            s,
            "{:<14} {:>7} {:>9} {:>12.4e} {:>12.4e} {:>20} {:>20}",
            r.controller.name(),
            ts_millis(r.ts),
            status,
            r.max_error,
            r.final_error,
            format!("[{:.3}, {:.3}]", r.force_min, r.force_max),
            format!("[{:.4}, {:.4}]", r.torque_min, r.torque_max),
        );
    }
    s
}

/// Runs every configured law on the configured reference.
pub fn cmd_run(config: &Path, options: &Options) -> Result<RunOutcome> {
    let (cfg, dir) = effective(config, options)?;
    let (reference, report) = cfg.reference(cfg.simulation.ts)?;
    run_reference(&cfg, &dir, &reference, report.as_ref())
}

fn run_reference(
    cfg: &ScenarioConfig,
    dir: &Path,
    reference: &ReferenceTrajectory,
    report: Option<&OptimizationReport>,
) -> Result<RunOutcome> {
    let ts = cfg.simulation.ts;
    let mut files = Vec::new();
    if report.is_some() {
        let path = dir.join(format!("{}_reference_{}ms.csv", cfg.name, ts_millis(ts)));
        reference.save_csv(&path)?;
        files.push(path);
    }
    let mut summaries = Vec::new();
    for kind in &cfg.controller.kinds {
        let scenario = cfg.scenario(*kind, reference, cfg.simulation.seed)?;
        let result = run_closed_loop(&scenario)?;
        files.push(result.save_csv(dir)?);
        summaries.push(result.summary());
    }
    let base = summaries.first().map_or(f64::NAN, |s: &Summary| s.max_error);
    let comparison = summaries
        .iter()
        .map(|s| Comparison {
            controller: s.controller.name().to_string(),
            max_error: s.max_error,
            ratio: s.max_error / base,
        })
        .collect();
    let path = dir.join(format!("{}_{}ms_summary.json", cfg.name, ts_millis(ts)));
    write_json(
        &path,
        &RunSummaryFile {
            config: cfg,
            optimizer: report.map(OptimizerDigest::from),
            runs: &summaries,
            comparison,
        },
    )?;
    files.push(path);
    let table = summary_table(&summaries);
    Ok(RunOutcome { summaries, files, table })
}

/// Optimizes the reference of an `optimal` scenario and writes the samples
/// and the full report. On failure the best iterate and its report are
/// still written before the error is returned. With `chain` the configured
/// laws then track the optimized reference as in [`cmd_run`].
pub fn cmd_optimize(config: &Path, options: &Options, chain: bool) -> Result<OptimizeOutcome> {
    let (cfg, dir) = effective(config, options)?;
    let ts = cfg.simulation.ts;
    let problem = cfg.optimization_problem(ts)?;
    let params = cfg.params()?;
    let init = polynomial_initializer(&problem)?;
    let report_path = dir.join(format!("{}_report.json", cfg.name));
    match optimize_minimax_acceleration(&problem, &init, &params) {
        Ok((reference, report)) => {
            let path = dir.join(format!("{}_optimal_{}ms.csv", cfg.name, ts_millis(ts)));
            reference.save_csv(&path)?;
            std::fs::write(&report_path, report.to_json() + "\n")?;
            let run = if chain {
                Some(run_reference(&cfg, &dir, &reference, Some(&report))?)
            } else {
                None
            };
            Ok(OptimizeOutcome {
                report,
                files: vec![path, report_path],
                run,
            })
        }
        Err(Error::OptimizerFailed(failure)) => {
            let path = dir.join(format!("{}_best_{}ms.csv", cfg.name, ts_millis(ts)));
            failure.best.save_csv(&path)?;
            std::fs::write(&report_path, failure.report.to_json() + "\n")?;
            Err(Error::OptimizerFailed(failure))
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize)]
struct SweepCsvRow {
    controller: String,
    ts: f64,
    completed: bool,
    max_error: f64,
    final_error: f64,
    max_error_x: f64,
    max_error_y: f64,
    force_min: f64,
    force_max: f64,
    torque_min: f64,
    torque_max: f64,
    diverged_at: Option<usize>,
}

/// Runs every configured law at every sampling time in `ts_list`. A single
/// sampling time also writes the per-run artifacts of [`cmd_run`].
pub fn cmd_sweep(config: &Path, ts_list: &[f64], options: &Options) -> Result<SweepOutcome> {
    if ts_list.is_empty() {
        return Err(Error::Config("empty sampling-time list".into()));
    }
    let (cfg, dir) = effective(config, options)?;
    for ts in ts_list {
        cfg.validate_at(*ts)?;
    }
    let mut files = Vec::new();
    if let [ts] = ts_list {
        let single = Options {
            ts: Some(*ts),
            out: Some(dir.clone()),
            ..options.clone()
        };
        files.extend(cmd_run(config, &single)?.files);
    }
    let seed = cfg.simulation.seed;
    let rows = sweep_sampling_times(
        |kind, ts| {
            let (reference, _) = cfg.reference(ts)?;
            cfg.scenario(kind, &reference, seed)
        },
        &cfg.controller.kinds,
        ts_list,
    )?;
    let path = dir.join(format!("{}_sweep.csv", cfg.name));
    let mut w = csv::Writer::from_path(&path)?;
    for row in &rows {
        let s = &row.summary;
        w.serialize(SweepCsvRow {
            controller: row.controller.name().to_string(),
            ts: row.ts,
            completed: s.completed,
            max_error: s.max_error,
            final_error: s.final_error,
            max_error_x: s.max_error_x,
            max_error_y: s.max_error_y,
            force_min: s.force_min,
            force_max: s.force_max,
            torque_min: s.torque_min,
            torque_max: s.torque_max,
            diverged_at: s.diverged.as_ref().map(|d| d.last_valid),
        })?;
    }
    w.flush()?;
    files.push(path);
    let summaries: Vec<Summary> = rows.iter().map(|r| r.summary.clone()).collect();
    let table = summary_table(&summaries);
    Ok(SweepOutcome { rows, files, table })
}

/// Parses `10,40,80` (milliseconds) into seconds.
pub fn parse_ts_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let ms: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad sampling time {s:?} in --ts")))?;
            if !(ms > 0.0 && ms.is_finite()) {
                return Err(Error::Config(format!("sampling time {ms} ms must be positive")));
            }
            Ok(ms * 1e-3)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ts_list_in_milliseconds() {
        assert_eq!(parse_ts_list("10, 40,80").unwrap(), vec![0.01, 0.04, 0.08]);
        assert!(parse_ts_list("10,x").is_err());
        assert!(parse_ts_list("0").is_err());
    }

    #[test]
    fn millis_formatting() {
        assert_eq!(ts_millis(0.01), "10");
        assert_eq!(ts_millis(0.1), "100");
        assert_eq!(ts_millis(0.0005), "0.5");
    }
}
