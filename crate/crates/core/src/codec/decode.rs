use nalgebra::{DMatrix, DVector};

use super::{EncodedSystem, WorkerResult};
use crate::error::{Error, Result};

/// Recover `A_1 z, ..., A_l z` from the results of `l` distinct workers.
pub fn decode_prefix(results: &[WorkerResult], sys: &EncodedSystem) -> Result<Vec<DVector<f64>>> {
    decode_levels(results, sys, results.len())
}

/// Recover `A_1 z, ..., A_levels z` from `results`; `levels` may be smaller
/// than the number of responders when only a prefix is needed.
pub fn decode_levels(results: &[WorkerResult], sys: &EncodedSystem, levels: usize) -> Result<Vec<DVector<f64>>> {
    let workers = sys.config().workers();
    let mut seen = vec![false; workers];
    for r in results {
        if r.worker_id == 0 || r.worker_id > workers || seen[r.worker_id - 1] {
            return Err(Error::BadWorker(r.worker_id));
        }
        seen[r.worker_id - 1] = true;
        if r.y.len() != r.tags.len() {
            return Err(Error::DimensionMismatch {
                expected: r.tags.len(),
                actual: r.y.len(),
            });
        }
    }
    let levels = levels.min(results.len());

    // received[level-1][block-1] = (coded_row, value) pairs
    let mut received: Vec<Vec<Vec<(usize, f64)>>> = sys.layout()[..levels]
        .iter()
        .map(|l| vec![Vec::new(); l.block_count()])
        .collect();
    for r in results {
        for (tag, &v) in r.tags.iter().zip(r.y.iter()) {
            if tag.level <= levels {
                received[tag.level - 1][tag.block - 1].push((tag.coded_row, v));
            }
        }
    }

    let mut out = Vec::with_capacity(levels);
    for (layout, blocks) in sys.layout()[..levels].iter().zip(received.iter_mut()) {
        let mut values = DVector::zeros(layout.rows);
        let mut at = 0;
        for (j, got) in blocks.iter_mut().enumerate() {
            let remainder = j == layout.full_blocks;
            let g = layout.generator(remainder);
            let need = g.rows_in();
            if got.len() < need {
                return Err(Error::InsufficientResults {
                    level: layout.level,
                    block: j + 1,
                    needed: need,
                    available: got.len(),
                });
            }
            // systematic rows first, so all-systematic picks reduce to a copy
            got.sort_unstable_by_key(|&(row, _)| row);
            let picked = &got[..need];
            let solved = if picked.iter().enumerate().all(|(i, &(row, _))| row == i) {
                DVector::from_iterator(need, picked.iter().map(|&(_, v)| v))
            } else {
                let rows: Vec<usize> = picked.iter().map(|&(row, _)| row).collect();
                let system: DMatrix<f64> = g.select(&rows);
                let rhs = DVector::from_iterator(need, picked.iter().map(|&(_, v)| v));
                system.lu().solve(&rhs).ok_or(Error::SingularDecode {
                    level: layout.level,
                    block: j + 1,
                })?
            };
            values.rows_mut(at, need).copy_from(&solved);
            at += need;
        }
        debug_assert_eq!(at, layout.rows);
        out.push(values);
    }
    Ok(out)
}
