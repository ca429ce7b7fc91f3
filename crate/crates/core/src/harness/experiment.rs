use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::config::{MatrixSource, ProblemSpec, ValidatedExperiment};
use super::problem::{derive_seed, random_problem};
use super::trace::{append_trace, format_float, TRACE_HEADER};
use crate::error::{Error, Result};
use crate::solver::{
    reference_solution_with, run_baseline, run_sequential, CodedLasso, LassoProblem, ReferenceOptions, RunOptions,
    RunTrace, SvdFactors,
};

pub const SEQUENTIAL: &str = "sequential";
pub const BASELINE: &str = "baseline";

/// Scalar outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub iterations: usize,
    pub total_time: f64,
    pub final_suboptimality: f64,
    /// First time each configured threshold was reached.
    pub time_to: Vec<Option<f64>>,
}

impl RunSummary {
    pub fn from_trace(trace: &RunTrace, thresholds: &[f64]) -> Self {
        Self {
            iterations: trace.records.len(),
            total_time: trace.total_time(),
            final_suboptimality: trace.final_suboptimality().unwrap_or(f64::NAN),
            time_to: thresholds.iter().map(|&t| trace.time_to(t)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub replication: usize,
    pub sequential: RunSummary,
    pub baseline: RunSummary,
    /// Full traces, kept only for the first few replications.
    pub traces: Option<(RunTrace, RunTrace)>,
}

/// Per-algorithm averages over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmStats {
    pub runs: usize,
    /// Pooled `sum(total_time) / sum(iterations)`.
    pub mean_iter_time: f64,
    pub mean_final_suboptimality: f64,
    /// Runs that reached each threshold.
    pub reached: Vec<usize>,
    /// Mean time to each threshold; `None` unless every run reached it.
    pub mean_time_to: Vec<Option<f64>>,
}

impl AlgorithmStats {
    pub fn from_runs(runs: &[&RunSummary], thresholds: &[f64]) -> Self {
        let n = runs.len();
        let iters: usize = runs.iter().map(|r| r.iterations).sum();
        let time: f64 = runs.iter().map(|r| r.total_time).sum();
        let finals: f64 = runs.iter().map(|r| r.final_suboptimality).sum();
        let mut reached = Vec::with_capacity(thresholds.len());
        let mut mean_time_to = Vec::with_capacity(thresholds.len());
        for j in 0..thresholds.len() {
            let hits: Vec<f64> = runs.iter().filter_map(|r| r.time_to[j]).collect();
            reached.push(hits.len());
            mean_time_to.push((hits.len() == n && n > 0).then(|| hits.iter().sum::<f64>() / n as f64));
        }
        Self {
            runs: n,
            mean_iter_time: if iters > 0 { time / iters as f64 } else { f64::NAN },
            mean_final_suboptimality: finals / n as f64,
            reached,
            mean_time_to,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub thresholds: Vec<f64>,
    pub sequential: AlgorithmStats,
    pub baseline: AlgorithmStats,
    /// Per threshold: replications where both runs reached it, and the ratio
    /// of mean baseline to mean sequential time over just those.
    pub conditional_speedup: Vec<(usize, Option<f64>)>,
}

impl ExperimentSummary {
    pub fn from_runs<'a>(
        pairs: impl IntoIterator<Item = (&'a RunSummary, &'a RunSummary)>,
        thresholds: &[f64],
    ) -> Self {
        let (seq, base): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let conditional_speedup = (0..thresholds.len())
            .map(|j| {
                let both: Vec<(f64, f64)> = seq
                    .iter()
                    .zip(&base)
                    .filter_map(|(s, b)| Some((s.time_to[j]?, b.time_to[j]?)))
                    .collect();
                let s: f64 = both.iter().map(|p| p.0).sum();
                let b: f64 = both.iter().map(|p| p.1).sum();
                (both.len(), (s > 0.0).then(|| b / s))
            })
            .collect();
        Self {
            thresholds: thresholds.to_vec(),
            sequential: AlgorithmStats::from_runs(&seq, thresholds),
            baseline: AlgorithmStats::from_runs(&base, thresholds),
            conditional_speedup,
        }
    }

    /// `baseline / sequential` mean time to threshold `j`.
    pub fn speedup(&self, j: usize) -> Option<f64> {
        match (self.baseline.mean_time_to[j], self.sequential.mean_time_to[j]) {
            (Some(b), Some(s)) if s > 0.0 => Some(b / s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub label: &'static str,
    pub experiment: ValidatedExperiment,
    pub replications: Vec<ReplicationResult>,
}

impl ExperimentReport {
    pub fn summary(&self) -> ExperimentSummary {
        ExperimentSummary::from_runs(
            self.replications.iter().map(|r| (&r.sequential, &r.baseline)),
            &self.experiment.config.thresholds,
        )
    }

    /// Trace CSV for the replications that kept their traces.
    pub fn trace_csv(&self) -> String {
        let mut out = format!("{TRACE_HEADER}\n");
        for rep in &self.replications {
            if let Some((seq, base)) = &rep.traces {
                append_trace(&mut out, &run_id(rep.replication, 0), SEQUENTIAL, &seq.records);
                append_trace(&mut out, &run_id(rep.replication, 1), BASELINE, &base.records);
            }
        }
        out
    }

    /// One row per (replication, algorithm).
    pub fn summary_csv(&self) -> String {
        let thresholds = &self.experiment.config.thresholds;
        let mut out = String::from("replication,algorithm,iterations,total_time,final_suboptimality");
        for t in thresholds {
            let _ = write!(out, ",time_to_{t:e}");
        }
        out.push('\n');
        for rep in &self.replications {
            for (name, run) in [(SEQUENTIAL, &rep.sequential), (BASELINE, &rep.baseline)] {
                let _ = write!(
                    out,
                    "{},{name},{},{},{}",
                    rep.replication,
                    run.iterations,
                    format_float(run.total_time),
                    format_float(run.final_suboptimality)
                );
                for t in &run.time_to {
                    out.push(',');
                    if let Some(t) = t {
                        out.push_str(&format_float(*t));
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let cfg = &self.experiment.config;
        let p = &cfg.problem;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "experiment {}: L={} n={} F {}x{} rank {} gamma={} latency {:?}",
            self.label, cfg.workers, cfg.rows_per_worker, p.rows, p.cols, p.rank, p.gamma, cfg.latency
        );
        let _ = writeln!(
            out,
            "seed {}, {} replications; configuration {}, baseline configuration {}",
            cfg.seed,
            self.replications.len(),
            self.experiment.schedule.config(),
            self.experiment.baseline_configuration
        );
        let phases: Vec<String> = self
            .experiment
            .schedule
            .phases()
            .iter()
            .map(|ph| {
                format!(
                    "rank {} for up to {} iterations waiting for {}",
                    ph.rank, ph.iterations, ph.responders
                )
            })
            .collect();
        let _ = writeln!(out, "phases: {}", phases.join("; "));

        let s = self.summary();
        for (name, st) in [(SEQUENTIAL, &s.sequential), (BASELINE, &s.baseline)] {
            let _ = write!(
                out,
                "{name:<10} mean iteration time {:.4}, mean final suboptimality {:.4e}",
                st.mean_iter_time, st.mean_final_suboptimality
            );
            for (j, t) in s.thresholds.iter().enumerate() {
                let _ = match st.mean_time_to[j] {
                    Some(v) => write!(out, ", mean time to {t:e} {v:.3}"),
                    None => write!(out, ", time to {t:e} reached in {}/{} runs", st.reached[j], st.runs),
                };
            }
            out.push('\n');
        }
        for (j, t) in s.thresholds.iter().enumerate() {
            match s.speedup(j) {
                Some(x) => {
                    let _ = writeln!(
                        out,
                        "time to {t:e}: sequential is {x:.3}x faster ({:.1}% less time)",
                        100.0 * (1.0 - 1.0 / x)
                    );
                }
                None => {
                    let _ = write!(out, "time to {t:e}: not reached by every run, no speedup reported");
                    match s.conditional_speedup[j] {
                        (n, Some(x)) if n > 0 => {
                            let _ = writeln!(out, " (over the {n} pairs where both reached it: {x:.3}x)");
                        }
                        _ => out.push('\n'),
                    }
                }
            }
        }
        out
    }
}

fn run_id(replication: usize, algorithm: usize) -> String {
    format!("{:06}", 2 * replication + algorithm)
}

/// Read a whitespace- or comma-separated numeric matrix, one row per line.
pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::InvalidProblem(format!("{}:{}: bad number {t:?}", path.display(), i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::InvalidProblem(format!(
                    "{}:{}: ragged row",
                    path.display(),
                    i + 1
                )));
            }
        }
        rows.push(row);
    }
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_row_iterator(r, c, rows.into_iter().flatten()))
}

pub fn build_problem(spec: &ProblemSpec, seed: u64) -> Result<LassoProblem> {
    let problem = match &spec.source {
        MatrixSource::Random(kind) => random_problem(*kind, spec.rows, spec.cols, spec.gamma, seed)?,
        MatrixSource::File { f, b } => {
            let f = load_matrix(f)?;
            let bm = load_matrix(b)?;
            let b = if bm.ncols() == 1 {
                bm.column(0).into_owned()
            } else if bm.nrows() == 1 {
                DVector::from_iterator(bm.ncols(), bm.iter().copied())
            } else {
                return Err(Error::InvalidProblem("b must be a vector".into()));
            };
            LassoProblem::new(f, b, spec.gamma)?
        }
    };
    if problem.f.shape() != (spec.rows, spec.cols) {
        return Err(Error::InvalidProblem(format!(
            "F is {}x{}, configured {}x{}",
            problem.f.nrows(),
            problem.f.ncols(),
            spec.rows,
            spec.cols
        )));
    }
    Ok(problem)
}

/// One paired replication: a fresh problem, its reference optimum, and the
/// sequential and baseline runs on independent latency streams.
pub fn run_replication(exp: &ValidatedExperiment, replication: usize) -> Result<ReplicationResult> {
    let cfg = &exp.config;
    let seed = derive_seed(cfg.seed, replication as u64);
    let problem = build_problem(&cfg.problem, derive_seed(seed, 0))?;
    let svd = SvdFactors::compute(&problem.f)?;
    if svd.rank() != cfg.problem.rank {
        return Err(Error::InvalidProblem(format!(
            "F has rank {}, configured {}",
            svd.rank(),
            cfg.problem.rank
        )));
    }
    let reference = reference_solution_with(&problem, svd.sigma_max(), ReferenceOptions::default())?;

    let seq_solver = CodedLasso::with_factors(problem.clone(), svd.clone(), exp.schedule.config())?;
    let base_solver = CodedLasso::with_factors(problem, svd, &exp.baseline_configuration)?;
    let seq = run_sequential(
        &seq_solver,
        &exp.schedule,
        &cfg.latency,
        derive_seed(seed, 1),
        &reference.x,
        RunOptions {
            charge_second_round: cfg.charge_second_round,
            stop_below: cfg.stop_below,
        },
    )?;
    let base = run_baseline(
        &base_solver,
        &cfg.latency,
        derive_seed(seed, 2),
        cfg.baseline_iterations,
        &reference.x,
        RunOptions {
            charge_second_round: cfg.charge_second_round,
            stop_below: cfg.baseline_stop_below,
        },
    )?;
    Ok(ReplicationResult {
        replication,
        sequential: RunSummary::from_trace(&seq, &cfg.thresholds),
        baseline: RunSummary::from_trace(&base, &cfg.thresholds),
        traces: (replication < cfg.trace_replications).then_some((seq, base)),
    })
}

/// Run every replication (in parallel) and collect them in order.
pub fn run_experiment(exp: &ValidatedExperiment) -> Result<ExperimentReport> {
    let replications = (0..exp.config.replications)
        .into_par_iter()
        .map(|r| run_replication(exp, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        label: exp.config.label(),
        experiment: exp.clone(),
        replications,
    })
}

/// Files written by [`write_outputs`].
pub const OUTPUT_FILES: [&str; 3] = ["trace.csv", "summary.csv", "report.txt"];

/// Write `trace.csv`, `summary.csv` and `report.txt` into `dir`. Files are
/// staged under temporary names and renamed together; on failure nothing
/// new is left behind.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let contents = [report.trace_csv(), report.summary_csv(), report.render()];
    let mut staged = Vec::new();
    let mut done = Vec::new();
    let result = (|| {
        for (name, body) in OUTPUT_FILES.iter().zip(&contents) {
            let tmp = dir.join(format!(".{name}.tmp"));
            fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
            staged.push((tmp, dir.join(name)));
        }
        for (tmp, dest) in &staged {
            fs::rename(tmp, dest).map_err(|e| Error::io(dest, e))?;
            done.push(dest.clone());
        }
        Ok(())
    })();
    if let Err(e) = result {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        for path in &done {
            let _ = fs::remove_file(path);
        }
        if created_dir {
            let _ = fs::remove_dir(dir);
        }
        return Err(e);
    }
    Ok(done)
}

/// Thresholds plus one `(sequential, baseline)` pair per replication.
pub type ParsedSummary = (Vec<f64>, Vec<(RunSummary, RunSummary)>);

/// Parse a `summary.csv` back into per-replication run summaries.
pub fn parse_summary_csv(text: &str) -> Result<ParsedSummary> {
    let bad = |what: &str| Error::InvalidConfiguration(format!("summary csv: {what}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let fixed = [
        "replication",
        "algorithm",
        "iterations",
        "total_time",
        "final_suboptimality",
    ];
    if cols.len() < fixed.len() || cols[..fixed.len()] != fixed {
        return Err(bad("unexpected header"));
    }
    let thresholds = cols[fixed.len()..]
        .iter()
        .map(|c| {
            c.strip_prefix("time_to_")
                .and_then(|t| t.parse::<f64>().ok())
                .ok_or_else(|| bad("bad threshold column"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seq = Vec::new();
    let mut base = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(bad("wrong field count"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let run = RunSummary {
            iterations: f[2].parse().map_err(|_| bad("bad iteration count"))?,
            total_time: num(f[3])?,
            final_suboptimality: num(f[4])?,
            time_to: f[5..]
                .iter()
                .map(|s| if s.is_empty() { Ok(None) } else { num(s).map(Some) })
                .collect::<Result<_>>()?,
        };
        match f[1] {
            SEQUENTIAL => seq.push(run),
            BASELINE => base.push(run),
            _ => return Err(bad("unknown algorithm")),
        }
    }
    if seq.len() != base.len() {
        return Err(bad("unpaired rows"));
    }
    Ok((thresholds, seq.into_iter().zip(base).collect()))
}
