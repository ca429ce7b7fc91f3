use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Exhaustive MDS verification is only attempted up to this many coded rows.
pub const MDS_CHECK_MAX_ROWS: usize = 12;

/// Smallest acceptable ratio of extreme singular values for a square
/// submatrix to count as invertible.
const MIN_RECIPROCAL_CONDITION: f64 = 1e-12;

/// Systematic real-valued MDS generator: identity on top, Cauchy parities
/// below.
#[derive(Debug, Clone, PartialEq)]
pub struct SystematicGenerator {
    rows_in: usize,
    rows_out: usize,
    coefficients: DMatrix<f64>,
}

impl SystematicGenerator {
    pub fn rows_in(&self) -> usize {
        self.rows_in
    }

    pub fn rows_out(&self) -> usize {
        self.rows_out
    }

    /// `rows_out x rows_in` coefficient matrix.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn row(&self, coded_row: usize) -> Vec<f64> {
        self.coefficients.row(coded_row).iter().copied().collect()
    }

    /// Coded block `G * message`.
    pub fn encode(&self, message: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(message.nrows(), self.rows_in);
        &self.coefficients * message
    }

    /// Square submatrix built from the given coded rows.
    pub fn select(&self, coded_rows: &[usize]) -> DMatrix<f64> {
        self.coefficients.select_rows(coded_rows)
    }

    /// Every `rows_in`-row submatrix is well conditioned.
    pub fn is_mds(&self) -> bool {
        let mut ok = true;
        for_each_subset(self.rows_out, self.rows_in, &mut |rows| {
            if ok && !is_invertible(&self.select(rows)) {
                ok = false;
            }
        });
        ok
    }
}

fn is_invertible(m: &DMatrix<f64>) -> bool {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    max > 0.0 && min / max > MIN_RECIPROCAL_CONDITION
}

/// Visit every `size`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, size: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == size {
            visit(cur);
            return;
        }
        let need = size - cur.len();
        for i in start..=n - need {
            cur.push(i);
            go(i + 1, n, size, cur, visit);
            cur.pop();
        }
    }
    if size > n {
        return;
    }
    go(0, n, size, &mut Vec::with_capacity(size), visit);
}

/// Build the `(rows_out, rows_in)` systematic generator.
///
/// Parity row `p`, column `c` is `1 / (p + c + 1)`: a Cauchy matrix with nodes
/// `x_p = p + 1/2`, `y_c = c + 1/2`, so every square submatrix of the parity
/// block is nonsingular and the stacked generator is MDS.
pub fn make_generator(rows_in: usize, rows_out: usize) -> Result<SystematicGenerator> {
    if rows_in == 0 || rows_in > rows_out {
        return Err(Error::GeneratorShape { rows_in, rows_out });
    }
    let coefficients = DMatrix::from_fn(rows_out, rows_in, |r, c| {
        if r < rows_in {
            if r == c {
                1.0
            } else {
                0.0
            }
        } else {
            let p = r - rows_in;
            1.0 / (p + c + 1) as f64
        }
    });
    let g = SystematicGenerator {
        rows_in,
        rows_out,
        coefficients,
    };
    if rows_out <= MDS_CHECK_MAX_ROWS && !g.is_mds() {
        return Err(Error::NotMds { rows_in, rows_out });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_generator_is_identity() {
        let g = make_generator(2, 2).unwrap();
        assert_eq!(g.coefficients(), &DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn repetition_like_code() {
        let g = make_generator(1, 3).unwrap();
        assert_eq!(g.coefficients()[(0, 0)], 1.0);
        for r in 0..3 {
            assert!(g.coefficients()[(r, 0)] != 0.0);
        }
    }

    #[test]
    fn all_pairs_invertible_for_2_of_4() {
        let g = make_generator(2, 4).unwrap();
        let mut count = 0;
        for a in 0..4 {
            for b in a + 1..4 {
                let m = g.select(&[a, b]);
                let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
                assert!(det.abs() > 1e-6, "rows {a},{b}: det {det}");
                count += 1;
            }
        }
        assert_eq!(count, 6);
    }

    #[test]
    fn systematic_prefix_is_exact() {
        for (k, n) in [(1, 5), (3, 5), (4, 4), (5, 12)] {
            let g = make_generator(k, n).unwrap();
            assert_eq!(g.coefficients().rows(0, k).into_owned(), DMatrix::<f64>::identity(k, k));
        }
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(make_generator(0, 3).is_err());
        assert!(make_generator(4, 3).is_err());
    }

    #[test]
    fn subset_enumeration_counts() {
        let mut n = 0;
        for_each_subset(6, 3, &mut |_| n += 1);
        assert_eq!(n, 20);
        let mut empty = 0;
        for_each_subset(3, 0, &mut |s| {
            assert!(s.is_empty());
            empty += 1
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn larger_generators_are_mds() {
        for n in 1..=MDS_CHECK_MAX_ROWS {
            for k in 1..=n {
                make_generator(k, n).unwrap();
            }
        }
    }
}
