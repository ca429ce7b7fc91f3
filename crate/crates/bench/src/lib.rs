//! Shared fixtures for the criterion benches.

use seqcode::feasibility::Configuration;
use seqcode::harness::problem::gaussian_matrix;
use seqcode::harness::{random_problem, MatrixKind};
use seqcode::solver::{CodedLasso, LassoProblem};
use seqcode::SourceMatrices;

/// Random source matrices with `columns` columns for `cfg`.
pub fn sources(cfg: &Configuration, columns: usize, seed: u64) -> SourceMatrices {
    let levels = cfg
        .k()
        .iter()
        .enumerate()
        .map(|(i, &k)| gaussian_matrix(k, columns, seed.wrapping_add(i as u64)))
        .collect();
    SourceMatrices::new(levels, columns).expect("valid sources")
}

/// The 38 x 500 lasso used by the two preset cluster layouts.
pub fn preset_problem(seed: u64) -> LassoProblem {
    random_problem(MatrixKind::Uniform, 38, 500, 5.0, seed).expect("random problem")
}

pub fn preset_solver(k: &[usize], seed: u64) -> CodedLasso {
    let cfg = Configuration::new(4, 10, k.to_vec()).expect("valid configuration");
    CodedLasso::new(preset_problem(seed), &cfg).expect("solver")
}
