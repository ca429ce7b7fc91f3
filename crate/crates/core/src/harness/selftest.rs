use std::fmt::Write as _;

use nalgebra::DVector;

use super::problem::{derive_seed, gaussian_matrix, gaussian_vector};
use crate::codec::{
    decode_prefix, encode_all, provenance_csv, relative_error, worker_multiply, EncodedSystem, SourceMatrices,
};
use crate::error::Result;
use crate::feasibility::{min_rows_oracle_with, row_count, Configuration, OracleLimits};

/// Outcome of encoding random matrices and decoding from every worker subset.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeDemo {
    pub system: EncodedSystem,
    pub subsets_checked: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
}

impl EncodeDemo {
    pub fn passed(&self) -> bool {
        self.max_relative_error <= self.tolerance
    }

    pub fn provenance_csv(&self) -> String {
        provenance_csv(&self.system)
    }
}

/// Encode Gaussian `A_1..A_L` (with `m` columns) for `cfg`, then decode
/// `A_1 z..A_l z` from every nonempty worker subset and compare with the
/// direct products.
pub fn demo_encode(cfg: &Configuration, columns: usize, seed: u64) -> Result<EncodeDemo> {
    let levels = cfg
        .k()
        .iter()
        .enumerate()
        .map(|(i, &k)| gaussian_matrix(k, columns, derive_seed(seed, i as u64 + 1)))
        .collect();
    let src = SourceMatrices::new(levels, columns)?;
    let system = encode_all(&src, cfg)?;
    let z = gaussian_vector(columns, derive_seed(seed, 0));
    let (subsets_checked, max_relative_error) = check_all_subsets(&system, &src, &z)?;
    Ok(EncodeDemo {
        system,
        subsets_checked,
        max_relative_error,
        tolerance: 1e-8,
    })
}

/// Largest relative decode error over all nonempty worker subsets.
pub fn check_all_subsets(system: &EncodedSystem, src: &SourceMatrices, z: &DVector<f64>) -> Result<(usize, f64)> {
    let workers = system.config().workers();
    let truth = src.multiply(z);
    let results = system
        .workers()
        .iter()
        .map(|w| worker_multiply(w, z))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for mask in 1u32..(1 << workers) {
        let subset: Vec<_> = (0..workers)
            .filter(|&w| mask & (1 << w) != 0)
            .map(|w| results[w].clone())
            .collect();
        let decoded = decode_prefix(&subset, system)?;
        for (got, want) in decoded.iter().zip(&truth) {
            worst = worst.max(relative_error(got, want));
        }
        checked += 1;
    }
    Ok((checked, worst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCase {
    pub workers: usize,
    pub level: usize,
    pub rows: usize,
    pub formula: usize,
    pub oracle: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSweep {
    pub cases: Vec<OracleCase>,
}

impl OracleSweep {
    pub fn mismatches(&self) -> impl Iterator<Item = &OracleCase> {
        self.cases.iter().filter(|c| c.formula != c.oracle)
    }

    pub fn passed(&self) -> bool {
        self.mismatches().next().is_none()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let bad: Vec<_> = self.mismatches().collect();
        for c in &bad {
            let _ = writeln!(
                out,
                "MISMATCH L={} i={} k={}: formula {} oracle {}",
                c.workers, c.level, c.rows, c.formula, c.oracle
            );
        }
        let _ = writeln!(
            out,
            "{} cases, {} mismatches: {}",
            self.cases.len(),
            bad.len(),
            if bad.is_empty() { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// Compare the closed-form row count with brute force for every
/// `1 <= i <= L <= max_workers` and `0 <= k <= max_rows`.
pub fn oracle_check(max_workers: usize, max_rows: usize) -> Result<OracleSweep> {
    let limits = OracleLimits {
        max_workers: max_workers.max(OracleLimits::default().max_workers),
        max_rows: max_rows.max(OracleLimits::default().max_rows),
    };
    let mut cases = Vec::new();
    for workers in 1..=max_workers {
        for level in 1..=workers {
            for rows in 0..=max_rows {
                let formula = row_count(level, rows, workers)?;
                let oracle = min_rows_oracle_with(workers, level, rows, limits)?.objective;
                cases.push(OracleCase {
                    workers,
                    level,
                    rows,
                    formula,
                    oracle,
                });
            }
        }
    }
    Ok(OracleSweep { cases })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_on_small_configs() {
        let cfg = Configuration::new(4, 3, vec![0, 3, 3, 1]).unwrap();
        let d = demo_encode(&cfg, 7, 1).unwrap();
        assert!(d.passed());
        assert_eq!(d.subsets_checked, 15);
        assert_eq!(d.provenance_csv().lines().count(), 13);

        let one = Configuration::new(1, 1, vec![1]).unwrap();
        let d = demo_encode(&one, 1, 0).unwrap();
        assert!(d.passed());
        assert_eq!(d.subsets_checked, 1);
    }

    #[test]
    fn small_sweep_agrees() {
        let s = oracle_check(3, 6).unwrap();
        assert!(s.passed());
        assert_eq!(s.cases.len(), (1 + 2 + 3) * 7);
        assert!(s.render().contains("PASS"));
    }
}
