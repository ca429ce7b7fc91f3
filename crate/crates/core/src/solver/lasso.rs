use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `minimize (1/2)||F x - b||^2 + gamma ||x||_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoProblem {
    pub f: DMatrix<f64>,
    pub b: DVector<f64>,
    pub gamma: f64,
}

impl LassoProblem {
    pub fn new(f: DMatrix<f64>, b: DVector<f64>, gamma: f64) -> Result<Self> {
        if f.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: f.nrows(),
                actual: b.len(),
            });
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidProblem(format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        Ok(Self { f, b, gamma })
    }

    /// Number of unknowns `m`.
    pub fn dim(&self) -> usize {
        self.f.ncols()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let r = &self.f * x - &self.b;
        0.5 * r.norm_squared() + self.gamma * x.lp_norm(1)
    }

    /// `F^T (F x - b)`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.f.tr_mul(&(&self.f * x - &self.b))
    }

    /// `F^T b`, the linear term.
    pub fn linear_term(&self) -> DVector<f64> {
        self.f.tr_mul(&self.b)
    }
}

/// Elementwise shrinkage toward zero by `theta`.
pub fn soft_threshold(v: &DVector<f64>, theta: f64) -> DVector<f64> {
    v.map(|x| soft_threshold_scalar(x, theta))
}

#[inline]
pub fn soft_threshold_scalar(x: f64, theta: f64) -> f64 {
    if x >= theta {
        x - theta
    } else if x <= -theta {
        x + theta
    } else {
        0.0
    }
}

/// Subgradient optimality residual for smooth gradient `g`:
/// `|g_i + gamma sign(x_i)|` on the support, `max(0, |g_i| - gamma)` off it.
pub fn residual_from_gradient(g: &DVector<f64>, x: &DVector<f64>, gamma: f64) -> f64 {
    g.iter()
        .zip(x.iter())
        .map(|(&gi, &xi)| {
            if xi != 0.0 {
                (gi + gamma * xi.signum()).abs()
            } else {
                (gi.abs() - gamma).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

pub fn optimality_residual(problem: &LassoProblem, x: &DVector<f64>) -> f64 {
    residual_from_gradient(&problem.gradient(x), x, problem.gamma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Every this many iterations, try solving the stationarity equations on
    /// the current support and sign pattern directly; `0` disables it.
    pub polish_every: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 1_000_000,
            polish_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Exact-matrix proximal gradient with step `1/sigma_max(F)^2`, run until the
/// optimality residual drops to the tolerance. Once the iterates have found
/// the support, a direct solve on it finishes the job.
pub fn reference_solution(problem: &LassoProblem) -> Result<ReferenceSolution> {
    let sigma = problem.f.singular_values().max();
    reference_solution_with(problem, sigma, ReferenceOptions::default())
}

pub fn reference_solution_with(
    problem: &LassoProblem,
    sigma_max: f64,
    opts: ReferenceOptions,
) -> Result<ReferenceSolution> {
    let m = problem.dim();
    let mut x = DVector::zeros(m);
    if sigma_max == 0.0 {
        // F = 0: the minimizer is x = 0 for every gamma
        let residual = optimality_residual(problem, &x);
        return Ok(ReferenceSolution {
            x,
            residual,
            iterations: 0,
        });
    }
    let step = 1.0 / (sigma_max * sigma_max);
    let threshold = step * problem.gamma;
    let h = problem.linear_term();
    let mut fx = DVector::zeros(problem.f.nrows());
    let mut g = DVector::zeros(m);
    let mut residual = f64::INFINITY;
    for it in 0..=opts.max_iterations {
        fx.gemv(1.0, &problem.f, &x, 0.0);
        g.gemv_tr(1.0, &problem.f, &fx, 0.0);
        g -= &h;
        residual = residual_from_gradient(&g, &x, problem.gamma);
        if residual <= opts.tolerance {
            return Ok(ReferenceSolution {
                x,
                residual,
                iterations: it,
            });
        }
        if it == opts.max_iterations {
            break;
        }
        if opts.polish_every > 0 && it > 0 && it % opts.polish_every == 0 {
            if let Some(p) = polish_on_support(problem, &x, &h) {
                let r = optimality_residual(problem, &p);
                if r <= opts.tolerance {
                    return Ok(ReferenceSolution {
                        x: p,
                        residual: r,
                        iterations: it,
                    });
                }
            }
        }
        for i in 0..m {
            x[i] = soft_threshold_scalar(x[i] - step * g[i], threshold);
        }
    }
    Err(Error::NoConvergence {
        residual,
        iterations: opts.max_iterations,
    })
}

/// Solve `F_S^T F_S x_S = h_S - gamma sign(x_S)` on the support `S` of `x`.
/// Returns `None` if the system is singular or the solution flips a sign.
fn polish_on_support(problem: &LassoProblem, x: &DVector<f64>, h: &DVector<f64>) -> Option<DVector<f64>> {
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    if support.is_empty() || support.len() > problem.f.nrows() {
        return None;
    }
    let fs = problem.f.select_columns(&support);
    let gram = fs.tr_mul(&fs);
    let rhs = DVector::from_iterator(
        support.len(),
        support.iter().map(|&i| h[i] - problem.gamma * x[i].signum()),
    );
    let xs = gram.cholesky()?.solve(&rhs);
    let mut out = DVector::zeros(x.len());
    for (&i, &v) in support.iter().zip(xs.iter()) {
        if v.signum() != x[i].signum() {
            return None;
        }
        out[i] = v;
    }
    Some(out)
}
