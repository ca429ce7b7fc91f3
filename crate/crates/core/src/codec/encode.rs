use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, RowDVector};

use super::{make_generator, split_matrix, LevelLayout, RowTag, SourceMatrices, WorkerMatrix, WorkerResult};
use crate::error::{Error, Result};
use crate::feasibility::{check_feasible, Configuration};

/// Worker matrices plus the metadata needed to decode their results.
///
/// Immutable after [`encode_all`]; shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSystem {
    config: Configuration,
    columns: usize,
    workers: Vec<WorkerMatrix>,
    layout: Vec<LevelLayout>,
}

impl EncodedSystem {
    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn workers(&self) -> &[WorkerMatrix] {
        &self.workers
    }

    pub fn worker(&self, id: usize) -> &WorkerMatrix {
        &self.workers[id - 1]
    }

    pub fn layout(&self) -> &[LevelLayout] {
        &self.layout
    }

    pub fn total_rows(&self) -> usize {
        self.workers.iter().map(|w| w.row_count()).sum()
    }

    /// Every worker computes its product (no stragglers).
    pub fn multiply_all(&self, z: &DVector<f64>) -> Result<Vec<WorkerResult>> {
        self.workers.iter().map(|w| worker_multiply(w, z)).collect()
    }
}

struct PendingRow {
    tag: RowTag,
    row: RowDVector<f64>,
}

/// Encode `src` into `L` worker matrices of at most `n` rows each.
pub fn encode_all(src: &SourceMatrices, cfg: &Configuration) -> Result<EncodedSystem> {
    let (budget, ok) = check_feasible(cfg);
    if !ok {
        return Err(Error::InfeasibleConfiguration {
            total: budget.total,
            capacity: budget.capacity,
        });
    }
    src.check_shape(cfg)?;

    let workers = cfg.workers();
    let capacity = cfg.rows_per_worker();
    let mut pending: Vec<Vec<PendingRow>> = (0..workers).map(|_| Vec::new()).collect();
    let mut layout = Vec::with_capacity(workers);
    let mut remainders = Vec::new();

    for level in 1..=workers {
        let split = split_matrix(src.level(level), level);
        let full_generator = if split.full_blocks.is_empty() {
            None
        } else {
            Some(make_generator(level, workers)?)
        };
        if let Some(g) = &full_generator {
            for (j, block) in split.full_blocks.iter().enumerate() {
                let coded = g.encode(block);
                // coded row r lands on worker r + 1
                for (r, slot) in pending.iter_mut().enumerate() {
                    slot.push(PendingRow {
                        tag: RowTag {
                            level,
                            block: j + 1,
                            coded_row: r,
                            remainder: false,
                        },
                        row: coded.row(r).into_owned(),
                    });
                }
            }
        }
        let remainder_generator = match &split.remainder {
            Some(rem) => {
                let r = rem.nrows();
                let g = make_generator(r, workers - level + r)?;
                remainders.push((level, split.full_blocks.len() + 1, g.encode(rem)));
                Some(g)
            }
            None => None,
        };
        layout.push(LevelLayout {
            level,
            rows: cfg.rows_at(level),
            full_blocks: split.full_blocks.len(),
            full_generator,
            remainder_generator,
            remainder_holders: Vec::new(),
        });
    }

    // remainder rows go to the least-loaded workers, lowest id first on ties
    for (level, block, coded) in remainders {
        let mut order: Vec<usize> = (0..workers).collect();
        order.sort_by_key(|&w| (pending[w].len(), w));
        let chosen = &order[..coded.nrows()];
        if chosen.iter().any(|&w| pending[w].len() + 1 > capacity) {
            return Err(Error::PackingFailure { level, capacity });
        }
        let mut holders = Vec::with_capacity(chosen.len());
        for (r, &w) in chosen.iter().enumerate() {
            pending[w].push(PendingRow {
                tag: RowTag {
                    level,
                    block,
                    coded_row: r,
                    remainder: true,
                },
                row: coded.row(r).into_owned(),
            });
            holders.push(w + 1);
        }
        layout[level - 1].remainder_holders = holders;
    }

    let columns = src.columns();
    let workers = pending
        .into_iter()
        .enumerate()
        .map(|(w, rows)| {
            debug_assert!(rows.len() <= capacity);
            let mut m = DMatrix::zeros(rows.len(), columns);
            let mut tags = Vec::with_capacity(rows.len());
            for (r, p) in rows.into_iter().enumerate() {
                m.set_row(r, &p.row);
                tags.push(p.tag);
            }
            WorkerMatrix {
                worker_id: w + 1,
                rows: m,
                tags,
            }
        })
        .collect();

    Ok(EncodedSystem {
        config: cfg.clone(),
        columns,
        workers,
        layout,
    })
}

/// `y = B_i z` for one worker, tags carried through.
pub fn worker_multiply(w: &WorkerMatrix, z: &DVector<f64>) -> Result<WorkerResult> {
    if z.len() != w.rows.ncols() {
        return Err(Error::DimensionMismatch {
            expected: w.rows.ncols(),
            actual: z.len(),
        });
    }
    Ok(WorkerResult {
        worker_id: w.worker_id,
        y: &w.rows * z,
        tags: w.tags.clone(),
    })
}

/// One CSV record per coded row:
/// `worker_id,level,block,coded_row,kind,coefficients` where `coefficients`
/// is the generator row, `;`-separated.
pub fn provenance_csv(sys: &EncodedSystem) -> String {
    let mut out = String::from("worker_id,level,block,coded_row,kind,coefficients\n");
    for w in sys.workers() {
        for tag in &w.tags {
            let g = sys.layout()[tag.level - 1].generator(tag.remainder);
            let coeffs: Vec<String> = g.row(tag.coded_row).iter().map(|c| format!("{c}")).collect();
            let kind = if tag.is_systematic(g.rows_in()) {
                "systematic"
            } else {
                "parity"
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                w.worker_id,
                tag.level,
                tag.block,
                tag.coded_row,
                kind,
                coeffs.join(";")
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{decode_prefix, relative_error};

    fn ramp(rows: usize, cols: usize, offset: f64) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |r, c| {
            offset + (r as f64) * 0.7 - (c as f64) * 0.3 + ((r * c) as f64).sin()
        })
    }

    fn example_system(m: usize) -> (SourceMatrices, EncodedSystem) {
        let cfg = Configuration::new(4, 3, vec![0, 3, 3, 1]).unwrap();
        let src = SourceMatrices::new(
            vec![ramp(0, m, 0.0), ramp(3, m, 1.0), ramp(3, m, -2.0), ramp(1, m, 0.5)],
            m,
        )
        .unwrap();
        let sys = encode_all(&src, &cfg).unwrap();
        (src, sys)
    }

    #[test]
    fn example_structure() {
        let (_, sys) = example_system(7);
        for w in sys.workers() {
            assert_eq!(w.row_count(), 3, "worker {}", w.worker_id);
        }
        for w in sys.workers() {
            let a2_full = w.tags.iter().filter(|t| t.level == 2 && !t.remainder).count();
            let a3 = w.tags.iter().filter(|t| t.level == 3).count();
            assert_eq!(a2_full, 1);
            assert_eq!(a3, 1);
        }
        let a2_rem: Vec<usize> = sys
            .workers()
            .iter()
            .filter(|w| w.tags.iter().any(|t| t.level == 2 && t.remainder))
            .map(|w| w.worker_id)
            .collect();
        assert_eq!(a2_rem, vec![1, 2, 3]);
        let a4: Vec<usize> = sys
            .workers()
            .iter()
            .filter(|w| w.tags.iter().any(|t| t.level == 4))
            .map(|w| w.worker_id)
            .collect();
        assert_eq!(a4, vec![4]);
        assert_eq!(sys.total_rows(), 12);
    }

    #[test]
    fn example_decodes_from_pairs_and_all() {
        let (src, sys) = example_system(7);
        let z = DVector::from_fn(7, |i, _| 1.0 + i as f64 * 0.25);
        let truth = src.multiply(&z);
        let all = sys.multiply_all(&z).unwrap();

        let pair = vec![all[2].clone(), all[3].clone()];
        let got = decode_prefix(&pair, &sys).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].len(), 0);
        assert!(relative_error(&got[1], &truth[1]) < 1e-12);

        let got = decode_prefix(&all, &sys).unwrap();
        for l in 0..4 {
            assert!(relative_error(&got[l], &truth[l]) < 1e-12);
        }
    }

    #[test]
    fn infeasible_rejected() {
        let cfg = Configuration::new(2, 1, vec![2, 0]).unwrap();
        let src = SourceMatrices::new(vec![ramp(2, 3, 0.0), ramp(0, 3, 0.0)], 3).unwrap();
        assert_eq!(
            encode_all(&src, &cfg),
            Err(Error::InfeasibleConfiguration { total: 4, capacity: 2 })
        );
    }

    #[test]
    fn shape_mismatch_rejected() {
        let cfg = Configuration::new(2, 2, vec![1, 0]).unwrap();
        let src = SourceMatrices::new(vec![ramp(2, 3, 0.0), ramp(0, 3, 0.0)], 3).unwrap();
        assert!(matches!(encode_all(&src, &cfg), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn multiply_checks_length() {
        let (_, sys) = example_system(4);
        let err = worker_multiply(sys.worker(1), &DVector::zeros(5)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 4, actual: 5 });
    }

    #[test]
    fn multiply_zero_and_one_hot() {
        let (_, sys) = example_system(5);
        let w = sys.worker(2);
        let zero = worker_multiply(w, &DVector::zeros(5)).unwrap();
        assert!(zero.y.iter().all(|&v| v == 0.0));
        let mut e = DVector::zeros(5);
        e[3] = 1.0;
        let col = worker_multiply(w, &e).unwrap();
        assert_eq!(col.y, w.rows.column(3).into_owned());
        assert_eq!(col.tags, w.tags);
    }

    #[test]
    fn provenance_dump() {
        let (_, sys) = example_system(7);
        let csv = provenance_csv(&sys);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "worker_id,level,block,coded_row,kind,coefficients");
        assert_eq!(lines.len(), 13);
        assert!(lines[1].starts_with("1,2,1,0,systematic,1;0"));
    }
}
