use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::problem::MatrixKind;
use crate::cluster::LatencyModel;
use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, find_config, Configuration, RankTarget};
use crate::solver::{min_responders, ApproxSchedule, Phase};

/// Named parameter sets for the two reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Example1,
    Example2,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "example1" => Some(Self::Example1),
            "example2" => Some(Self::Example2),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        let common = ExperimentConfig {
            preset: Some(*self),
            workers: 4,
            rows_per_worker: 10,
            configuration: ConfigChoice::Explicit(vec![]),
            baseline_configuration: ConfigChoice::Auto,
            latency: LatencyModel::Exponential { rate: 1.0 },
            seed: 0,
            replications: 1,
            trace_replications: 1,
            problem: ProblemSpec {
                rows: 38,
                cols: 500,
                rank: 38,
                gamma: 5.0,
                source: MatrixSource::Random(MatrixKind::Uniform),
            },
            phases: vec![],
            stop_below: None,
            baseline_iterations: 200_000,
            baseline_stop_below: None,
            charge_second_round: false,
            thresholds: vec![],
            output: None,
        };
        match self {
            Self::Example1 => ExperimentConfig {
                configuration: ConfigChoice::Explicit(vec![0, 0, 6, 32]),
                phases: vec![PhaseSpec::new(6, 1500), PhaseSpec::new(38, 200_000)],
                stop_below: Some(1e-3),
                baseline_stop_below: Some(1e-3),
                thresholds: vec![1e-3],
                ..common
            },
            Self::Example2 => ExperimentConfig {
                configuration: ConfigChoice::Explicit(vec![5, 10, 0, 0]),
                phases: vec![PhaseSpec::new(5, 30), PhaseSpec::new(15, 1500)],
                baseline_stop_below: Some(0.2),
                thresholds: vec![0.2],
                ..common
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigChoice {
    Explicit(Vec<usize>),
    /// Search for a feasible configuration meeting the phase targets.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Random(MatrixKind),
    /// Whitespace- or comma-separated text files holding `F` (one row per
    /// line) and `b` (one value per line).
    File {
        f: PathBuf,
        b: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub rows: usize,
    pub cols: usize,
    /// Expected rank of `F`; the run fails if the drawn matrix differs.
    pub rank: usize,
    pub gamma: f64,
    pub source: MatrixSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpec {
    pub rank: usize,
    pub iterations: usize,
    /// `None` picks the fewest responders that cover `rank`.
    pub responders: Option<usize>,
}

impl PhaseSpec {
    pub fn new(rank: usize, iterations: usize) -> Self {
        Self {
            rank,
            iterations,
            responders: None,
        }
    }
}

/// Everything one `experiment` invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Preset the values started from, if any.
    pub preset: Option<Preset>,
    pub workers: usize,
    pub rows_per_worker: usize,
    pub configuration: ConfigChoice,
    pub baseline_configuration: ConfigChoice,
    pub latency: LatencyModel,
    pub seed: u64,
    pub replications: usize,
    /// Replications whose full per-iteration traces are written.
    pub trace_replications: usize,
    pub problem: ProblemSpec,
    pub phases: Vec<PhaseSpec>,
    pub stop_below: Option<f64>,
    pub baseline_iterations: usize,
    pub baseline_stop_below: Option<f64>,
    pub charge_second_round: bool,
    /// Suboptimality levels reported in the summary.
    pub thresholds: Vec<f64>,
    pub output: Option<PathBuf>,
}

/// Configuration checked against the feasibility and rank conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedExperiment {
    pub config: ExperimentConfig,
    pub schedule: ApproxSchedule,
    pub baseline_configuration: Configuration,
}

impl ExperimentConfig {
    /// `example1`/`example2` only when every model parameter equals the
    /// preset; seed, replication count and output location do not count.
    pub fn label(&self) -> &'static str {
        match self.preset {
            Some(p) if self.same_parameters(&p.config()) => p.name(),
            _ => "custom",
        }
    }

    fn same_parameters(&self, other: &Self) -> bool {
        let strip = |c: &Self| Self {
            preset: None,
            seed: 0,
            replications: 0,
            trace_replications: 0,
            output: None,
            ..c.clone()
        };
        strip(self) == strip(other)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml(&text, base)
    }

    /// Parse config text; relative matrix file paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        raw.resolve(base)
    }

    pub fn validate(&self) -> Result<ValidatedExperiment> {
        let bad = |msg: String| Err(Error::InvalidConfiguration(msg));
        self.latency.validate()?;
        let p = &self.problem;
        if p.rows == 0 || p.cols == 0 {
            return bad(format!("problem shape {}x{} is empty", p.rows, p.cols));
        }
        if p.rank == 0 || p.rank > p.rows.min(p.cols) {
            return bad(format!("rank {} impossible for a {}x{} matrix", p.rank, p.rows, p.cols));
        }
        if !(p.gamma.is_finite() && p.gamma >= 0.0) {
            return bad(format!("gamma must be non-negative, got {}", p.gamma));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.phases.is_empty() {
            return bad("schedule needs at least one phase".into());
        }
        if let Some(last) = self.phases.last() {
            if last.rank > p.rank {
                return bad(format!(
                    "final phase rank {} exceeds the matrix rank {}",
                    last.rank, p.rank
                ));
            }
        }
        for level in self
            .thresholds
            .iter()
            .chain(&self.stop_below)
            .chain(&self.baseline_stop_below)
        {
            if !(level.is_finite() && *level >= 0.0) {
                return bad(format!("suboptimality levels must be non-negative, got {level}"));
            }
        }

        let config = match &self.configuration {
            ConfigChoice::Explicit(k) => {
                if k.len() != self.workers {
                    return bad(format!(
                        "configuration has {} entries for {} workers",
                        k.len(),
                        self.workers
                    ));
                }
                Configuration::new(self.workers, self.rows_per_worker, k.clone())?
            }
            ConfigChoice::Auto => {
                let targets = self
                    .phases
                    .iter()
                    .map(|ph| {
                        ph.responders
                            .map(|responders| RankTarget {
                                rank: ph.rank,
                                responders,
                            })
                            .ok_or_else(|| {
                                Error::InvalidConfiguration(
                                    "configuration = \"auto\" needs a responder count in every phase".into(),
                                )
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                find_config(self.workers, self.rows_per_worker, &targets)?.ok_or_else(|| {
                    Error::InvalidConfiguration(format!(
                        "no feasible configuration for L={} n={} meets the phase targets",
                        self.workers, self.rows_per_worker
                    ))
                })?
            }
        };
        let (budget, ok) = check_feasible(&config);
        if !ok {
            return Err(Error::InfeasibleConfiguration {
                total: budget.total,
                capacity: budget.capacity,
            });
        }
        if config.total_rows() > p.rank {
            return bad(format!(
                "configuration {config} stores {} rows but the matrix has rank {}",
                config.total_rows(),
                p.rank
            ));
        }

        let phases = self
            .phases
            .iter()
            .map(|ph| {
                let responders = match ph.responders {
                    Some(r) => r,
                    None => min_responders(&config, ph.rank).ok_or_else(|| {
                        Error::InvalidSchedule(format!(
                            "rank {} exceeds the {} rows of {config}",
                            ph.rank,
                            config.total_rows()
                        ))
                    })?,
                };
                Ok(Phase {
                    rank: ph.rank,
                    iterations: ph.iterations,
                    responders,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let schedule = ApproxSchedule::new(phases, config.clone())?;

        let baseline_configuration = match &self.baseline_configuration {
            ConfigChoice::Explicit(k) => {
                if k.len() != self.workers {
                    return bad(format!(
                        "baseline configuration has {} entries for {} workers",
                        k.len(),
                        self.workers
                    ));
                }
                Configuration::new(self.workers, self.rows_per_worker, k.clone())?
            }
            ConfigChoice::Auto if config.total_rows() == p.rank => config.clone(),
            ConfigChoice::Auto => {
                // all rows at the last level: recoverable only from every worker
                let mut k = vec![0; self.workers];
                k[self.workers - 1] = p.rank;
                Configuration::new(self.workers, self.rows_per_worker, k)?
            }
        };
        let (budget, ok) = check_feasible(&baseline_configuration);
        if !ok {
            return Err(Error::InfeasibleConfiguration {
                total: budget.total,
                capacity: budget.capacity,
            });
        }
        if baseline_configuration.total_rows() != p.rank {
            return bad(format!(
                "baseline configuration {baseline_configuration} must store exactly {} rows",
                p.rank
            ));
        }

        Ok(ValidatedExperiment {
            config: self.clone(),
            schedule,
            baseline_configuration,
        })
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFile {
    preset: Option<String>,
    seed: Option<u64>,
    replications: Option<usize>,
    trace_replications: Option<usize>,
    output: Option<PathBuf>,
    #[serde(default)]
    cluster: RawCluster,
    #[serde(default)]
    latency: RawLatency,
    #[serde(default)]
    problem: RawProblem,
    #[serde(default)]
    schedule: RawSchedule,
    #[serde(default)]
    baseline: RawBaseline,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCluster {
    workers: Option<usize>,
    rows_per_worker: Option<usize>,
    configuration: Option<RawChoice>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawChoice {
    List(Vec<usize>),
    Word(String),
}

impl RawChoice {
    fn resolve(self) -> Result<ConfigChoice> {
        match self {
            Self::List(k) => Ok(ConfigChoice::Explicit(k)),
            Self::Word(w) if w == "auto" => Ok(ConfigChoice::Auto),
            Self::Word(w) => Err(Error::InvalidConfiguration(format!(
                "configuration must be a list or \"auto\", got {w:?}"
            ))),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLatency {
    kind: Option<String>,
    rate: Option<f64>,
    shift: Option<f64>,
    value: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    rows: Option<usize>,
    cols: Option<usize>,
    rank: Option<usize>,
    gamma: Option<f64>,
    matrix: Option<String>,
    f_file: Option<PathBuf>,
    b_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    phases: Option<Vec<Vec<usize>>>,
    stop_below: Option<f64>,
    charge_second_round: Option<bool>,
    thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBaseline {
    iterations: Option<usize>,
    stop_below: Option<f64>,
    configuration: Option<RawChoice>,
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidConfiguration(format!("missing key `{key}` (no preset to inherit from)")))
}

impl RawFile {
    fn resolve(self, base: &Path) -> Result<ExperimentConfig> {
        let preset = match &self.preset {
            Some(name) => Some(
                Preset::parse(name).ok_or_else(|| Error::InvalidConfiguration(format!("unknown preset {name:?}")))?,
            ),
            None => None,
        };
        let mut cfg = match preset {
            Some(p) => p.config(),
            None => ExperimentConfig {
                preset: None,
                workers: required(self.cluster.workers, "cluster.workers")?,
                rows_per_worker: required(self.cluster.rows_per_worker, "cluster.rows_per_worker")?,
                configuration: ConfigChoice::Auto,
                baseline_configuration: ConfigChoice::Auto,
                latency: LatencyModel::Exponential { rate: 1.0 },
                seed: 0,
                replications: 1,
                trace_replications: 1,
                problem: ProblemSpec {
                    rows: required(self.problem.rows, "problem.rows")?,
                    cols: required(self.problem.cols, "problem.cols")?,
                    rank: 0,
                    gamma: required(self.problem.gamma, "problem.gamma")?,
                    source: MatrixSource::Random(MatrixKind::Uniform),
                },
                phases: vec![],
                stop_below: None,
                baseline_iterations: 100_000,
                baseline_stop_below: None,
                charge_second_round: false,
                thresholds: vec![],
                output: None,
            },
        };
        if preset.is_none() {
            cfg.problem.rank = cfg.problem.rows.min(cfg.problem.cols);
        }

        if let Some(v) = self.seed.or(self.latency.seed) {
            cfg.seed = v;
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
        if let Some(v) = self.trace_replications {
            cfg.trace_replications = v;
        }
        if let Some(v) = self.output {
            cfg.output = Some(v);
        }

        if let Some(v) = self.cluster.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.cluster.rows_per_worker {
            cfg.rows_per_worker = v;
        }
        if let Some(v) = self.cluster.configuration {
            cfg.configuration = v.resolve()?;
        }

        cfg.latency = resolve_latency(self.latency, cfg.latency)?;

        let p = self.problem;
        if let Some(v) = p.rows {
            cfg.problem.rows = v;
        }
        if let Some(v) = p.cols {
            cfg.problem.cols = v;
        }
        if let Some(v) = p.rank {
            cfg.problem.rank = v;
        }
        if let Some(v) = p.gamma {
            cfg.problem.gamma = v;
        }
        match p.matrix.as_deref() {
            None if p.f_file.is_none() && p.b_file.is_none() => {}
            None | Some("file") => {
                let f = required(p.f_file, "problem.f_file")?;
                let b = required(p.b_file, "problem.b_file")?;
                cfg.problem.source = MatrixSource::File {
                    f: base.join(f),
                    b: base.join(b),
                };
            }
            Some(name) => {
                let kind = MatrixKind::parse(name)
                    .ok_or_else(|| Error::InvalidConfiguration(format!("unknown matrix source {name:?}")))?;
                if p.f_file.is_some() || p.b_file.is_some() {
                    return Err(Error::InvalidConfiguration(format!(
                        "matrix = {name:?} does not read f_file/b_file"
                    )));
                }
                cfg.problem.source = MatrixSource::Random(kind);
            }
        }

        let s = self.schedule;
        if let Some(phases) = s.phases {
            cfg.phases = phases
                .into_iter()
                .map(|ph| match ph.as_slice() {
                    &[rank, iterations] => Ok(PhaseSpec::new(rank, iterations)),
                    &[rank, iterations, responders] => Ok(PhaseSpec {
                        rank,
                        iterations,
                        responders: Some(responders),
                    }),
                    other => Err(Error::InvalidConfiguration(format!(
                        "phase must be [rank, iterations] or [rank, iterations, responders], got {other:?}"
                    ))),
                })
                .collect::<Result<_>>()?;
        } else if preset.is_none() {
            return Err(Error::InvalidConfiguration(
                "missing key `schedule.phases` (no preset to inherit from)".into(),
            ));
        }
        if let Some(v) = s.stop_below {
            cfg.stop_below = Some(v);
        }
        if let Some(v) = s.charge_second_round {
            cfg.charge_second_round = v;
        }
        if let Some(v) = s.thresholds {
            cfg.thresholds = v;
        }

        let b = self.baseline;
        if let Some(v) = b.iterations {
            cfg.baseline_iterations = v;
        }
        if let Some(v) = b.stop_below {
            cfg.baseline_stop_below = Some(v);
        }
        if let Some(v) = b.configuration {
            cfg.baseline_configuration = v.resolve()?;
        }
        Ok(cfg)
    }
}

fn resolve_latency(raw: RawLatency, current: LatencyModel) -> Result<LatencyModel> {
    let kind = raw.kind.as_deref().unwrap_or(current.name());
    let model = match kind {
        "exponential" => {
            let rate = raw.rate.unwrap_or(match current {
                LatencyModel::Exponential { rate } => rate,
                _ => 1.0,
            });
            LatencyModel::exponential(rate)?
        }
        "deterministic" => {
            let value = match (raw.value, current) {
                (Some(v), _) => v,
                (None, LatencyModel::Deterministic { value }) => value,
                (None, _) => 1.0,
            };
            LatencyModel::deterministic(value)?
        }
        "shifted-exponential" => {
            let shift = raw
                .shift
                .ok_or_else(|| Error::InvalidConfiguration("shifted-exponential latency needs `shift`".into()))?;
            LatencyModel::shifted_exponential(shift, raw.rate.unwrap_or(1.0))?
        }
        other => return Err(Error::InvalidConfiguration(format!("unknown latency kind {other:?}"))),
    };
    Ok(model)
}
