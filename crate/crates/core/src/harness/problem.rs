use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::solver::LassoProblem;

/// How the entries of `F` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// i.i.d. uniform on `[0, 1)`.
    Uniform,
    /// i.i.d. standard normal.
    Gaussian,
}

impl MatrixKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" | "random-uniform" => Some(Self::Uniform),
            "gaussian" | "random-gaussian" => Some(Self::Gaussian),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform => "random-uniform",
            Self::Gaussian => "random-gaussian",
        }
    }
}

/// Mix a seed with a stream label (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // row-major fill so the stream order does not depend on storage layout
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.sample(StandardNormal);
        }
    }
    m
}

pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.random::<f64>();
        }
    }
    m
}

pub fn gaussian_vector(len: usize, seed: u64) -> DVector<f64> {
    gaussian_matrix(len, 1, seed).column(0).into_owned()
}

/// Bound on redraws when a sample does not meet its requirements.
const MAX_REDRAWS: u64 = 64;

/// Random lasso instance: `F` of the given kind with full row rank, `b`
/// standard normal, redrawn until `gamma < ||F^T b||_inf` so that the
/// minimizer is nonzero.
pub fn random_problem(kind: MatrixKind, rows: usize, cols: usize, gamma: f64, seed: u64) -> Result<LassoProblem> {
    let want_rank = rows.min(cols);
    for attempt in 0..MAX_REDRAWS {
        let s = derive_seed(seed, attempt);
        let f = match kind {
            MatrixKind::Uniform => uniform_matrix(rows, cols, derive_seed(s, 1)),
            MatrixKind::Gaussian => gaussian_matrix(rows, cols, derive_seed(s, 1)),
        };
        let sv = f.singular_values();
        let tol = sv.max() * f64::EPSILON * rows.max(cols) as f64;
        if sv.iter().filter(|&&x| x > tol).count() < want_rank {
            continue;
        }
        let b = gaussian_vector(rows, derive_seed(s, 2));
        let problem = LassoProblem::new(f, b, gamma)?;
        if problem.linear_term().amax() > gamma {
            return Ok(problem);
        }
    }
    Err(Error::InvalidProblem(format!(
        "no usable {rows}x{cols} {} instance in {MAX_REDRAWS} draws",
        kind.name()
    )))
}
