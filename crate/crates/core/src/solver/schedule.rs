use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, Configuration, RankTarget};

/// One approximation phase: `iterations` proximal steps using the rank-`rank`
/// truncation, each waiting for `responders` workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub rank: usize,
    pub iterations: usize,
    pub responders: usize,
}

/// Phases sharing one feasible configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxSchedule {
    phases: Vec<Phase>,
    config: Configuration,
}

impl ApproxSchedule {
    /// Ranks must strictly increase, responder counts must not decrease, and
    /// each phase's rank must be recoverable from its responders.
    pub fn new(phases: Vec<Phase>, config: Configuration) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidSchedule("no phases".into()));
        }
        let (budget, ok) = check_feasible(&config);
        if !ok {
            return Err(Error::InfeasibleConfiguration {
                total: budget.total,
                capacity: budget.capacity,
            });
        }
        for (r, p) in phases.iter().enumerate() {
            if p.rank == 0 {
                return Err(Error::InvalidSchedule(format!("phase {} has rank 0", r + 1)));
            }
            if p.responders == 0 || p.responders > config.workers() {
                return Err(Error::InvalidSchedule(format!(
                    "phase {} waits for {} of {} workers",
                    r + 1,
                    p.responders,
                    config.workers()
                )));
            }
            let avail = config.prefix_rows(p.responders);
            if avail < p.rank {
                return Err(Error::InvalidSchedule(format!(
                    "phase {} needs rank {} but {} workers recover only {avail} rows",
                    r + 1,
                    p.rank,
                    p.responders
                )));
            }
        }
        for w in phases.windows(2) {
            if w[1].rank <= w[0].rank {
                return Err(Error::InvalidSchedule("ranks must strictly increase".into()));
            }
            if w[1].responders < w[0].responders {
                return Err(Error::InvalidSchedule("responder counts must not decrease".into()));
            }
        }
        Ok(Self { phases, config })
    }

    /// Phases with the smallest responder count that covers each rank.
    pub fn with_min_responders(ranks_and_iterations: &[(usize, usize)], config: Configuration) -> Result<Self> {
        let phases = ranks_and_iterations
            .iter()
            .map(|&(rank, iterations)| {
                let responders = min_responders(&config, rank).ok_or_else(|| {
                    Error::InvalidSchedule(format!(
                        "rank {rank} exceeds the {} rows of {config}",
                        config.total_rows()
                    ))
                })?;
                Ok(Phase {
                    rank,
                    iterations,
                    responders,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(phases, config)
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn total_iterations(&self) -> usize {
        self.phases.iter().map(|p| p.iterations).sum()
    }

    pub fn targets(&self) -> Vec<RankTarget> {
        self.phases
            .iter()
            .map(|p| RankTarget {
                rank: p.rank,
                responders: p.responders,
            })
            .collect()
    }
}

/// Smallest `l` with `k_1 + ... + k_l >= rank`.
pub fn min_responders(config: &Configuration, rank: usize) -> Option<usize> {
    (1..=config.workers()).find(|&l| config.prefix_rows(l) >= rank)
}
