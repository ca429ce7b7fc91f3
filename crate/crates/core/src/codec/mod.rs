//! Coded sequential matrix-vector multiplication.
//!
//! Each level matrix `A_i` is cut into `i`-row blocks ([`split_matrix`]). A
//! full block is encoded with an `(L, i)` systematic MDS code and its `L` coded
//! rows are dealt one per worker, so any `i` workers recover it. A short
//! remainder block of `r = k_i mod i` rows is encoded with an
//! `(L - i + r, r)` code and spread over that many distinct workers; any `i`
//! workers include at least `r` of them.
//!
//! ```text
//!            full blocks            remainders
//! worker 1:  A_2^(1)[0] A_3^(1)[0]  A_2^(2)[0]
//! worker 2:  A_2^(1)[1] A_3^(1)[1]  A_2^(2)[1]
//! worker 3:  A_2^(1)[2] A_3^(1)[2]  A_2^(2)[2]
//! worker 4:  A_2^(1)[3] A_3^(1)[3]  A_4^(1)[0]
//! ```
//!
//! From any `l` worker results [`decode_prefix`] returns `A_1 z, ..., A_l z`.

mod decode;
mod encode;
mod generator;
mod split;

pub use decode::{decode_levels, decode_prefix};
pub use encode::{encode_all, provenance_csv, worker_multiply, EncodedSystem};
pub use generator::{make_generator, SystematicGenerator, MDS_CHECK_MAX_ROWS};
pub use split::{split_matrix, BlockSplit};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::feasibility::Configuration;

/// The user's level matrices `A_1..A_L`, all with `m` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceMatrices {
    levels: Vec<DMatrix<f64>>,
    columns: usize,
}

impl SourceMatrices {
    pub fn new(levels: Vec<DMatrix<f64>>, columns: usize) -> Result<Self> {
        for a in &levels {
            if a.ncols() != columns {
                return Err(Error::DimensionMismatch {
                    expected: columns,
                    actual: a.ncols(),
                });
            }
        }
        Ok(Self { levels, columns })
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn levels(&self) -> &[DMatrix<f64>] {
        &self.levels
    }

    /// `A_level` for a 1-based level.
    pub fn level(&self, level: usize) -> &DMatrix<f64> {
        &self.levels[level - 1]
    }

    /// Direct products `A_1 z, ..., A_L z`.
    pub fn multiply(&self, z: &DVector<f64>) -> Vec<DVector<f64>> {
        self.levels.iter().map(|a| a * z).collect()
    }

    pub(crate) fn check_shape(&self, cfg: &Configuration) -> Result<()> {
        if self.levels.len() != cfg.workers() {
            return Err(Error::DimensionMismatch {
                expected: cfg.workers(),
                actual: self.levels.len(),
            });
        }
        for (a, &k) in self.levels.iter().zip(cfg.k()) {
            if a.nrows() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: a.nrows(),
                });
            }
        }
        Ok(())
    }
}

/// Where a coded row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowTag {
    /// Source level `i` (1-based).
    pub level: usize,
    /// Block index `j` within the level (1-based; the remainder block is last).
    pub block: usize,
    /// Row index within the block's generator (0-based; `< rows_in` is systematic).
    pub coded_row: usize,
    pub remainder: bool,
}

impl RowTag {
    pub fn is_systematic(&self, rows_in: usize) -> bool {
        self.coded_row < rows_in
    }
}

/// Coded rows stored on one worker.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerMatrix {
    /// 1-based worker index.
    pub worker_id: usize,
    pub rows: DMatrix<f64>,
    pub tags: Vec<RowTag>,
}

impl WorkerMatrix {
    pub fn row_count(&self) -> usize {
        self.tags.len()
    }
}

/// `y_i = B_i z` as returned by worker `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerResult {
    pub worker_id: usize,
    pub y: DVector<f64>,
    pub tags: Vec<RowTag>,
}

/// Per-level decoding metadata: block counts and the generators used.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLayout {
    pub level: usize,
    pub rows: usize,
    pub full_blocks: usize,
    pub full_generator: Option<SystematicGenerator>,
    pub remainder_generator: Option<SystematicGenerator>,
    /// Worker ids holding remainder coded rows, indexed by coded row.
    pub remainder_holders: Vec<usize>,
}

impl LevelLayout {
    pub fn block_count(&self) -> usize {
        self.full_blocks + usize::from(self.remainder_generator.is_some())
    }

    pub fn generator(&self, remainder: bool) -> &SystematicGenerator {
        if remainder {
            self.remainder_generator.as_ref().expect("remainder block")
        } else {
            self.full_generator.as_ref().expect("full block")
        }
    }
}

/// Relative error with denominator `max(1, ||truth||_inf)`.
pub fn relative_error(got: &DVector<f64>, truth: &DVector<f64>) -> f64 {
    if got.len() != truth.len() {
        return f64::INFINITY;
    }
    let denom = truth.amax().max(1.0);
    (got - truth).amax() / denom
}
