use nalgebra::DMatrix;

/// `A_i` cut into consecutive `i`-row blocks plus an optional short tail.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSplit {
    pub level: usize,
    pub full_blocks: Vec<DMatrix<f64>>,
    pub remainder: Option<DMatrix<f64>>,
}

impl BlockSplit {
    pub fn block_count(&self) -> usize {
        self.full_blocks.len() + usize::from(self.remainder.is_some())
    }

    /// Stack the blocks back into the original matrix.
    pub fn concat(&self, columns: usize) -> DMatrix<f64> {
        let rows: usize = self.full_blocks.iter().map(|b| b.nrows()).sum::<usize>()
            + self.remainder.as_ref().map_or(0, |r| r.nrows());
        let mut out = DMatrix::zeros(rows, columns);
        let mut at = 0;
        for b in self.full_blocks.iter().chain(self.remainder.iter()) {
            out.rows_mut(at, b.nrows()).copy_from(b);
            at += b.nrows();
        }
        out
    }
}

/// Split `a` into `floor(k/level)` blocks of `level` rows and, when `level`
/// does not divide `k`, one remainder block of `k mod level` rows.
pub fn split_matrix(a: &DMatrix<f64>, level: usize) -> BlockSplit {
    assert!(level >= 1, "level is 1-based");
    let k = a.nrows();
    let full = k / level;
    let rem = k % level;
    let full_blocks = (0..full).map(|j| a.rows(j * level, level).into_owned()).collect();
    let remainder = (rem > 0).then(|| a.rows(full * level, rem).into_owned());
    BlockSplit {
        level,
        full_blocks,
        remainder,
    }
}
