use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin SVD `F = U diag(sigma) V^T` restricted to the nonzero singular
/// values, sorted in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// `w x d`
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    /// `m x d`
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    pub fn compute(f: &DMatrix<f64>) -> Result<Self> {
        if f.nrows() == 0 || f.ncols() == 0 {
            return Err(Error::InvalidProblem("empty matrix".into()));
        }
        let svd = f.clone().svd(true, true);
        let u_full = svd.u.expect("requested U");
        let vt_full = svd.v_t.expect("requested V^T");
        let sv = svd.singular_values;

        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        let top = sv[order[0]];
        let tol = top * f64::EPSILON * f.nrows().max(f.ncols()) as f64;
        let kept: Vec<usize> = order.into_iter().filter(|&i| sv[i] > tol).collect();
        if kept.is_empty() {
            return Err(Error::InvalidProblem("matrix is zero".into()));
        }

        let u = u_full.select_columns(&kept);
        let v = vt_full.select_rows(&kept).transpose();
        let sigma = DVector::from_iterator(kept.len(), kept.iter().map(|&i| sv[i]));
        Ok(Self { u, sigma, v })
    }

    /// Numerical rank `d`.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    /// `sigma_{rank+1}`, or 0 past the end.
    pub fn sigma_after(&self, rank: usize) -> f64 {
        if rank < self.rank() {
            self.sigma[rank]
        } else {
            0.0
        }
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.truncate(self.rank()).expect("full rank").dense()
    }

    pub fn truncate(&self, rank: usize) -> Result<TruncatedSvd<'_>> {
        truncate_svd(self, rank)
    }
}

/// Rank-`r` truncation `F_(r) = sum_{i<=r} sigma_i u_i v_i^T`, held as
/// factor slices.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedSvd<'a> {
    factors: &'a SvdFactors,
    rank: usize,
}

pub fn truncate_svd(svd: &SvdFactors, rank: usize) -> Result<TruncatedSvd<'_>> {
    if rank == 0 || rank > svd.rank() {
        return Err(Error::RankOutOfRange { rank, max: svd.rank() });
    }
    Ok(TruncatedSvd { factors: svd, rank })
}

impl TruncatedSvd<'_> {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Largest singular value of `F_(r)`.
    pub fn sigma_max(&self) -> f64 {
        self.factors.sigma[0]
    }

    /// `||F - F_(r)||_2`.
    pub fn spectral_error(&self) -> f64 {
        self.factors.sigma_after(self.rank)
    }

    /// `||H - H_(r)||_2 = sigma_{r+1}^2`.
    pub fn gram_error(&self) -> f64 {
        self.spectral_error().powi(2)
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let u = self.factors.u.columns(0, self.rank);
        let v = self.factors.v.columns(0, self.rank);
        let mut us = u.into_owned();
        for (c, s) in self.factors.sigma.rows(0, self.rank).iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        us * v.transpose()
    }

    /// `F_(r) x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let vx = self.factors.v.columns(0, self.rank).tr_mul(x);
        let scaled = vx.component_mul(&self.factors.sigma.rows(0, self.rank));
        self.factors.u.columns(0, self.rank) * scaled
    }

    /// `H_(r) x = F_(r)^T F_(r) x`.
    pub fn gram_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let vx = self.factors.v.columns(0, self.rank).tr_mul(x);
        gram_from_projection(self.factors, self.rank, &vx)
    }
}

/// `sum_{i<=rank} sigma_i^2 v_i t_i` from the projections `t_i = v_i^T x`.
pub(crate) fn gram_from_projection(factors: &SvdFactors, rank: usize, projection: &DVector<f64>) -> DVector<f64> {
    let s2 = factors.sigma.rows(0, rank).map(|s| s * s);
    let weighted = projection.rows(0, rank).component_mul(&s2);
    factors.v.columns(0, rank) * weighted
}
