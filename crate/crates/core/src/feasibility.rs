//! Which row-count configurations a cluster of `L` workers with `n` rows each
//! can serve sequentially.
//!
//! A configuration `(k_1, ..., k_L)` asks that `A_i z` (with `A_i` holding
//! `k_i` rows) be recoverable from *any* `i` responding workers. The coding
//! scheme in [`crate::codec`] spends [`row_count`] encoded rows on level `i`;
//! the configuration fits iff the per-level spends add up to at most `n * L`.
//!
//! [`min_rows_oracle`] solves the integer covering program behind the lower
//! bound by exhaustive search so the closed form can be checked against it.

use crate::error::{Error, Result};

/// Cluster shape `(L, n)` plus per-level row counts `k_1..k_L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    workers: usize,
    rows_per_worker: usize,
    k: Vec<usize>,
}

impl Configuration {
    pub fn new(workers: usize, rows_per_worker: usize, k: Vec<usize>) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidConfiguration("L must be at least 1".into()));
        }
        if rows_per_worker == 0 {
            return Err(Error::InvalidConfiguration("n must be at least 1".into()));
        }
        if k.len() != workers {
            return Err(Error::InvalidConfiguration(format!(
                "expected {workers} row counts, got {}",
                k.len()
            )));
        }
        Ok(Self {
            workers,
            rows_per_worker,
            k,
        })
    }

    /// Number of workers `L`.
    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Rows each worker can hold, `n`.
    pub fn rows_per_worker(&self) -> usize {
        self.rows_per_worker
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    /// `k_level` for a 1-based level.
    pub fn rows_at(&self, level: usize) -> usize {
        self.k[level - 1]
    }

    /// `h_l = k_1 + ... + k_l`, the number of source rows recoverable from any
    /// `l` workers.
    pub fn prefix_rows(&self, responders: usize) -> usize {
        self.k[..responders.min(self.workers)].iter().sum()
    }

    pub fn total_rows(&self) -> usize {
        self.k.iter().sum()
    }

    /// `n * L`.
    pub fn capacity(&self) -> usize {
        self.workers * self.rows_per_worker
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ks: Vec<String> = self.k.iter().map(|k| k.to_string()).collect();
        write!(f, "L={} n={} k=({})", self.workers, self.rows_per_worker, ks.join(","))
    }
}

/// Encoded rows consumed by each level, against the cluster capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBudget {
    pub per_level: Vec<usize>,
    pub total: usize,
    pub capacity: usize,
}

impl RowBudget {
    pub fn is_feasible(&self) -> bool {
        self.total <= self.capacity
    }

    pub fn is_tight(&self) -> bool {
        self.total == self.capacity
    }
}

/// Encoded rows spent on level `level` when it carries `rows` source rows.
///
/// Each full block of `level` rows is spread over all `workers`; a remainder of
/// `rows mod level` rows needs `workers - level + rows mod level` coded rows.
pub fn row_count(level: usize, rows: usize, workers: usize) -> Result<usize> {
    if level == 0 || level > workers {
        return Err(Error::LevelOutOfRange { level, workers });
    }
    let full = rows / level;
    let rem = rows % level;
    let mut s = full * workers;
    if rem != 0 {
        s += workers - level + rem;
    }
    Ok(s)
}

pub fn row_budget(cfg: &Configuration) -> RowBudget {
    let per_level: Vec<usize> = cfg
        .k()
        .iter()
        .enumerate()
        .map(|(idx, &k)| row_count(idx + 1, k, cfg.workers()).expect("level in range"))
        .collect();
    RowBudget {
        total: per_level.iter().sum(),
        per_level,
        capacity: cfg.capacity(),
    }
}

/// Budget plus verdict: `true` iff the configuration fits in `n * L` rows.
pub fn check_feasible(cfg: &Configuration) -> (RowBudget, bool) {
    let budget = row_budget(cfg);
    let ok = budget.is_feasible();
    (budget, ok)
}

/// Size limits for [`min_rows_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_workers: usize,
    pub max_rows: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_workers: 6,
            max_rows: 24,
        }
    }
}

/// An allocation `n_{i,1..L}` achieving the minimum of the covering program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConverseInstance {
    pub workers: usize,
    pub level: usize,
    pub rows: usize,
    pub allocation: Vec<usize>,
    pub objective: usize,
}

impl ConverseInstance {
    /// Every `level`-subset of workers holds at least `rows` coded rows.
    pub fn covers(&self) -> bool {
        let mut sorted = self.allocation.clone();
        sorted.sort_unstable();
        sorted[..self.level].iter().sum::<usize>() >= self.rows
    }
}

/// Exact minimum of `sum_l n_l` over integer `n_l >= 0` such that every
/// `level`-subset of the `workers` sums to at least `rows`.
pub fn min_rows_oracle(workers: usize, level: usize, rows: usize) -> Result<usize> {
    min_rows_oracle_with(workers, level, rows, OracleLimits::default()).map(|c| c.objective)
}

/// [`min_rows_oracle`] with explicit limits, returning a minimizing allocation.
///
/// The constraints are invariant under permuting workers, so only
/// nonincreasing allocations are enumerated; for those the binding subset is
/// the `level` smallest entries. Entries are capped at `ceil(rows/level)`:
/// from any optimum, moving a unit from the largest entries onto the smallest
/// keeps the binding sum and does not raise the total, so some optimum lies
/// under the cap.
pub fn min_rows_oracle_with(
    workers: usize,
    level: usize,
    rows: usize,
    limits: OracleLimits,
) -> Result<ConverseInstance> {
    if level == 0 || level > workers {
        return Err(Error::LevelOutOfRange { level, workers });
    }
    if workers > limits.max_workers || rows > limits.max_rows {
        return Err(Error::OracleGuard {
            workers,
            rows,
            max_workers: limits.max_workers,
            max_rows: limits.max_rows,
        });
    }
    let cap = rows.div_ceil(level);
    let mut best: Option<Vec<usize>> = None;
    let mut best_sum = usize::MAX;
    let mut current = Vec::with_capacity(workers);
    enumerate_nonincreasing(workers, cap, &mut current, &mut |alloc| {
        let binding: usize = alloc[workers - level..].iter().sum();
        if binding < rows {
            return;
        }
        let total: usize = alloc.iter().sum();
        if total < best_sum {
            best_sum = total;
            best = Some(alloc.to_vec());
        }
    });
    let allocation = best.expect("the all-cap allocation always covers");
    Ok(ConverseInstance {
        workers,
        level,
        rows,
        objective: best_sum,
        allocation,
    })
}

fn enumerate_nonincreasing(len: usize, max: usize, current: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if current.len() == len {
        visit(current);
        return;
    }
    let upper = current.last().copied().unwrap_or(max);
    for v in 0..=upper {
        current.push(v);
        enumerate_nonincreasing(len, max, current, visit);
        current.pop();
    }
}

/// Phase requirement: `rank` source rows recoverable from any `responders`
/// workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankTarget {
    pub rank: usize,
    pub responders: usize,
}

fn validate_targets(workers: usize, targets: &[RankTarget]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::InvalidSchedule("no rank targets".into()));
    }
    for t in targets {
        if t.responders == 0 || t.responders > workers {
            return Err(Error::InvalidSchedule(format!(
                "responder count {} outside 1..={workers}",
                t.responders
            )));
        }
    }
    for w in targets.windows(2) {
        if w[1].rank < w[0].rank || w[1].responders < w[0].responders {
            return Err(Error::InvalidSchedule(
                "rank targets and responder counts must be nondecreasing".into(),
            ));
        }
    }
    Ok(())
}

/// True when `cfg` makes every target's rank available from its responder
/// count.
pub fn meets_targets(cfg: &Configuration, targets: &[RankTarget]) -> bool {
    targets.iter().all(|t| cfg.prefix_rows(t.responders) >= t.rank)
}

/// All feasible configurations that meet `targets` and whose total row count
/// equals the final rank target (rows past the last target serve no phase).
pub fn feasible_configs(workers: usize, rows_per_worker: usize, targets: &[RankTarget]) -> Result<Vec<Configuration>> {
    validate_targets(workers, targets)?;
    let total = targets.last().map(|t| t.rank).unwrap_or(0);
    let capacity = workers * rows_per_worker;
    let mut out = Vec::new();
    let mut k = Vec::with_capacity(workers);
    search_configs(workers, total, capacity, 0, &mut k, &mut |k| {
        let cfg = Configuration::new(workers, rows_per_worker, k.to_vec()).expect("shape");
        if meets_targets(&cfg, targets) {
            out.push(cfg);
        }
    });
    Ok(out)
}

fn search_configs(
    workers: usize,
    remaining: usize,
    capacity: usize,
    spent: usize,
    k: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    let level = k.len() + 1;
    if level == workers {
        let s = row_count(level, remaining, workers).expect("level in range");
        if spent + s <= capacity {
            k.push(remaining);
            visit(k);
            k.pop();
        }
        return;
    }
    for rows in 0..=remaining {
        let s = row_count(level, rows, workers).expect("level in range");
        if spent + s > capacity {
            // s is nondecreasing in rows
            break;
        }
        k.push(rows);
        search_configs(workers, remaining - rows, capacity, spent + s, k, visit);
        k.pop();
    }
}

/// One witness configuration for `targets`, or `None`.
///
/// Tries the canonical choice first (each phase's rank increment placed at
/// that phase's responder level), then falls back to the first configuration
/// from [`feasible_configs`].
pub fn find_config(workers: usize, rows_per_worker: usize, targets: &[RankTarget]) -> Result<Option<Configuration>> {
    validate_targets(workers, targets)?;
    let mut k = vec![0usize; workers];
    let mut prev = 0;
    for t in targets {
        k[t.responders - 1] += t.rank - prev;
        prev = t.rank;
    }
    let canonical = Configuration::new(workers, rows_per_worker, k)?;
    if check_feasible(&canonical).1 && meets_targets(&canonical, targets) {
        return Ok(Some(canonical));
    }
    Ok(feasible_configs(workers, rows_per_worker, targets)?.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(l: usize, n: usize, k: &[usize]) -> Configuration {
        Configuration::new(l, n, k.to_vec()).unwrap()
    }

    #[test]
    fn row_count_examples() {
        assert_eq!(row_count(2, 3, 4).unwrap(), 7);
        assert_eq!(row_count(3, 3, 4).unwrap(), 4);
        assert_eq!(row_count(1, 0, 4).unwrap(), 0);
        assert_eq!(row_count(4, 0, 4).unwrap(), 0);
    }

    #[test]
    fn row_count_rejects_bad_level() {
        assert!(matches!(row_count(0, 3, 4), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(row_count(5, 3, 4), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn configuration_validation() {
        assert!(Configuration::new(0, 1, vec![]).is_err());
        assert!(Configuration::new(2, 0, vec![0, 0]).is_err());
        assert!(Configuration::new(2, 1, vec![0]).is_err());
    }

    #[test]
    fn small_example_is_tight() {
        let (b, ok) = check_feasible(&cfg(4, 3, &[0, 3, 3, 1]));
        assert!(ok);
        assert_eq!(b.per_level, vec![0, 7, 4, 1]);
        assert_eq!((b.total, b.capacity), (12, 12));
    }

    #[test]
    fn single_mds_special_case() {
        let (b, ok) = check_feasible(&cfg(4, 3, &[0, 0, 9, 0]));
        assert!(ok);
        assert_eq!(b.per_level[2], 12);
    }

    #[test]
    fn overfull_first_level() {
        let (b, ok) = check_feasible(&cfg(4, 3, &[4, 0, 0, 0]));
        assert!(!ok);
        assert_eq!(b.total, 16);
    }

    #[test]
    fn experiment_configs_tight() {
        for k in [[0, 0, 6, 32], [5, 10, 0, 0]] {
            let (b, ok) = check_feasible(&cfg(4, 10, &k));
            assert!(ok && b.is_tight(), "{k:?}");
        }
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(min_rows_oracle(4, 2, 3).unwrap(), 7);
        assert_eq!(min_rows_oracle(4, 3, 3).unwrap(), 4);
        assert_eq!(min_rows_oracle(4, 4, 1).unwrap(), 1);
        assert_eq!(min_rows_oracle(5, 3, 6).unwrap(), 10);
    }

    #[test]
    fn oracle_allocation_covers() {
        let inst = min_rows_oracle_with(5, 3, 7, OracleLimits::default()).unwrap();
        assert!(inst.covers());
        assert_eq!(inst.allocation.iter().sum::<usize>(), inst.objective);
    }

    #[test]
    fn oracle_guard() {
        assert!(matches!(min_rows_oracle(7, 2, 3), Err(Error::OracleGuard { .. })));
        assert!(matches!(min_rows_oracle(4, 2, 25), Err(Error::OracleGuard { .. })));
        let wide = OracleLimits {
            max_workers: 7,
            max_rows: 30,
        };
        assert_eq!(
            min_rows_oracle_with(7, 2, 25, wide).unwrap().objective,
            row_count(2, 25, 7).unwrap()
        );
    }

    #[test]
    fn feasible_configs_contains_experiment_witnesses() {
        let ex1 = feasible_configs(
            4,
            10,
            &[
                RankTarget { rank: 6, responders: 3 },
                RankTarget {
                    rank: 38,
                    responders: 4,
                },
            ],
        )
        .unwrap();
        assert!(ex1.iter().any(|c| c.k() == [0, 0, 6, 32]));

        let ex2 = feasible_configs(
            4,
            10,
            &[
                RankTarget { rank: 5, responders: 1 },
                RankTarget {
                    rank: 15,
                    responders: 2,
                },
            ],
        )
        .unwrap();
        assert!(ex2.iter().any(|c| c.k() == [5, 10, 0, 0]));
        for c in ex1.iter().chain(&ex2) {
            assert!(check_feasible(c).1);
        }
    }

    #[test]
    fn feasible_configs_empty() {
        let none = feasible_configs(1, 1, &[RankTarget { rank: 2, responders: 1 }]).unwrap();
        assert!(none.is_empty());
        assert_eq!(
            find_config(1, 1, &[RankTarget { rank: 2, responders: 1 }]).unwrap(),
            None
        );
    }

    #[test]
    fn find_config_prefers_canonical() {
        let c = find_config(
            4,
            10,
            &[
                RankTarget { rank: 6, responders: 3 },
                RankTarget {
                    rank: 38,
                    responders: 4,
                },
            ],
        )
        .unwrap()
        .unwrap();
        assert_eq!(c.k(), [0, 0, 6, 32]);
    }

    #[test]
    fn rejects_decreasing_targets() {
        let r = feasible_configs(
            4,
            10,
            &[
                RankTarget { rank: 6, responders: 3 },
                RankTarget { rank: 8, responders: 2 },
            ],
        );
        assert!(r.is_err());
    }
}
