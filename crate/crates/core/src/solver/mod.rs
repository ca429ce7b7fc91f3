//! Sequential-approximation proximal gradient for the lasso.
//!
//! `F = U diag(sigma) V^T`; phase `r` replaces `F^T F` by the rank-`r`
//! truncation `H_(r) = V_r diag(sigma_r^2) V_r^T`. The projections `V^T x` are
//! what the coded cluster computes: level `i` of the configuration holds the
//! next `k_i` right singular vectors, so waiting for fewer workers yields a
//! shorter prefix of projections and a lower-rank `H_(r) x`.

mod lasso;
mod schedule;
mod sequential;
mod svd;

pub use lasso::{
    optimality_residual, reference_solution, reference_solution_with, residual_from_gradient, soft_threshold,
    soft_threshold_scalar, LassoProblem, ReferenceOptions, ReferenceSolution,
};
pub use schedule::{min_responders, ApproxSchedule, Phase};
pub use sequential::{
    baseline_schedule, build_level_blocks, normalized_suboptimality, run_baseline, run_sequential, time_to_threshold,
    CodedLasso, IterationRecord, MatvecOutcome, RunOptions, RunTrace,
};
pub use svd::{truncate_svd, SvdFactors, TruncatedSvd};
