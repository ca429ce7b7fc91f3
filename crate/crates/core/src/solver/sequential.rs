use nalgebra::{DMatrix, DVector};

use super::lasso::{residual_from_gradient, soft_threshold_scalar, LassoProblem};
use super::schedule::{min_responders, ApproxSchedule, Phase};
use super::svd::{gram_from_projection, SvdFactors};
use crate::cluster::{simulate_wait, LatencyModel, SeededRng};
use crate::codec::{decode_levels, encode_all, worker_multiply, EncodedSystem, SourceMatrices};
use crate::error::{Error, Result};
use crate::feasibility::Configuration;

/// Stack right singular vectors into level matrices: `A_i` holds
/// `v_{h_{i-1}+1}^T .. v_{h_i}^T` with `h_i = k_1 + ... + k_i`.
pub fn build_level_blocks(v: &DMatrix<f64>, cfg: &Configuration) -> Result<SourceMatrices> {
    let d = v.ncols();
    let total = cfg.total_rows();
    if total > d {
        return Err(Error::InvalidSchedule(format!(
            "configuration holds {total} rows but the factor has rank {d}"
        )));
    }
    let m = v.nrows();
    let mut at = 0;
    let levels = cfg
        .k()
        .iter()
        .map(|&k| {
            let block = v.columns(at, k).transpose();
            at += k;
            block
        })
        .collect();
    SourceMatrices::new(levels, m)
}

/// A lasso problem whose `F^T F x` products run through the coded cluster.
///
/// The SVD, the encoded worker matrices and `F^T b` are computed once; the
/// workers never change between approximation phases.
#[derive(Debug, Clone)]
pub struct CodedLasso {
    problem: LassoProblem,
    svd: SvdFactors,
    encoded: EncodedSystem,
    linear: DVector<f64>,
}

/// Gradient core `H_(r) x` and the simulated time it took.
#[derive(Debug, Clone, PartialEq)]
pub struct MatvecOutcome {
    pub product: DVector<f64>,
    pub elapsed: f64,
    pub responders: Vec<usize>,
}

impl CodedLasso {
    pub fn new(problem: LassoProblem, config: &Configuration) -> Result<Self> {
        let svd = SvdFactors::compute(&problem.f)?;
        Self::with_factors(problem, svd, config)
    }

    pub fn with_factors(problem: LassoProblem, svd: SvdFactors, config: &Configuration) -> Result<Self> {
        let src = build_level_blocks(&svd.v, config)?;
        let encoded = encode_all(&src, config)?;
        let linear = problem.linear_term();
        Ok(Self {
            problem,
            svd,
            encoded,
            linear,
        })
    }

    pub fn problem(&self) -> &LassoProblem {
        &self.problem
    }

    pub fn svd(&self) -> &SvdFactors {
        &self.svd
    }

    pub fn encoded(&self) -> &EncodedSystem {
        &self.encoded
    }

    pub fn config(&self) -> &Configuration {
        self.encoded.config()
    }

    /// Responders needed for the exact product (rank `d`).
    pub fn exact_responders(&self) -> Option<usize> {
        min_responders(self.config(), self.svd.rank())
    }

    /// Broadcast `x`, wait for `phase.responders` workers, decode
    /// `t = [v_1 .. v_h]^T x` and form `sum_{i<=rank} sigma_i^2 v_i t_i`.
    pub fn sequential_matvec(
        &self,
        x: &DVector<f64>,
        phase: &Phase,
        model: &LatencyModel,
        rng: &mut SeededRng,
    ) -> Result<MatvecOutcome> {
        let workers = self.config().workers();
        let wait = simulate_wait(model, workers, phase.responders, rng);
        let results = wait
            .responders
            .iter()
            .map(|&id| worker_multiply(self.encoded.worker(id), x))
            .collect::<Result<Vec<_>>>()?;
        let decoded = decode_levels(&results, &self.encoded, phase.responders)?;
        let available: usize = decoded.iter().map(|v| v.len()).sum();
        if available < phase.rank {
            return Err(Error::InvalidSchedule(format!(
                "decoded {available} projections, phase needs {}",
                phase.rank
            )));
        }
        let projection = DVector::from_iterator(
            phase.rank,
            decoded.iter().flat_map(|v| v.iter().copied()).take(phase.rank),
        );
        Ok(MatvecOutcome {
            product: gram_from_projection(&self.svd, phase.rank, &projection),
            elapsed: wait.elapsed,
            responders: wait.responders,
        })
    }

    /// `(1/2) x^T H_(r) x - h^T x + gamma ||x||_1`, the function a phase
    /// actually descends (up to the constant `||b||^2 / 2`).
    pub fn phase_objective(&self, x: &DVector<f64>, rank: usize) -> f64 {
        let t = self.svd.v.columns(0, rank).tr_mul(x);
        let quad: f64 = t
            .iter()
            .zip(self.svd.sigma.iter())
            .map(|(ti, s)| (s * ti).powi(2))
            .sum();
        0.5 * quad - self.linear.dot(x) + self.problem.gamma * x.lp_norm(1)
    }

    /// Optimality residual of the rank-`rank` phase problem.
    pub fn phase_residual(&self, x: &DVector<f64>, rank: usize) -> f64 {
        let t = self.svd.v.columns(0, rank).tr_mul(x);
        let g = gram_from_projection(&self.svd, rank, &t) - &self.linear;
        residual_from_gradient(&g, x, self.problem.gamma)
    }

    /// Step `1/sigma_1(F_(r))^2`; the leading singular value is in every
    /// truncation, so this is the same for all phases.
    pub fn step_size(&self) -> f64 {
        1.0 / self.svd.sigma_max().powi(2)
    }

    /// One proximal step given the gradient core `H_(r) x`.
    pub fn prox_step(&self, x: &DVector<f64>, product: &DVector<f64>) -> DVector<f64> {
        let t = self.step_size();
        let theta = t * self.problem.gamma;
        DVector::from_iterator(
            x.len(),
            x.iter()
                .zip(product.iter().zip(self.linear.iter()))
                .map(|(&xi, (&gi, &hi))| soft_threshold_scalar(xi - t * (gi - hi), theta)),
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Charge a second independent wait per iteration for distributing
    /// `F_(r)^T (F_(r) x)`.
    pub charge_second_round: bool,
    /// End the run once normalized suboptimality reaches this level.
    pub stop_below: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based global iteration counter.
    pub iteration: usize,
    /// 1-based phase index.
    pub phase: usize,
    pub iter_time: f64,
    pub cum_time: f64,
    pub objective: f64,
    pub suboptimality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub final_x: DVector<f64>,
}

impl RunTrace {
    /// First cumulative time at which suboptimality is at or below `level`.
    pub fn time_to(&self, level: f64) -> Option<f64> {
        time_to_threshold(&self.records, level)
    }

    pub fn final_suboptimality(&self) -> Option<f64> {
        self.records.last().map(|r| r.suboptimality)
    }

    pub fn total_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_time)
    }
}

pub fn time_to_threshold(records: &[IterationRecord], level: f64) -> Option<f64> {
    records.iter().find(|r| r.suboptimality <= level).map(|r| r.cum_time)
}

/// `||x - x*|| / ||x*||` (absolute distance when `x* = 0`).
pub fn normalized_suboptimality(x: &DVector<f64>, reference: &DVector<f64>) -> f64 {
    let scale = reference.norm();
    let dist = (x - reference).norm();
    if scale > 0.0 {
        dist / scale
    } else {
        dist
    }
}

/// Sequential-approximation proximal gradient: each phase runs its iteration
/// count with the truncated product, carrying `x` across phase boundaries.
pub fn run_sequential(
    solver: &CodedLasso,
    schedule: &ApproxSchedule,
    model: &LatencyModel,
    seed: u64,
    reference: &DVector<f64>,
    opts: RunOptions,
) -> Result<RunTrace> {
    if schedule.config() != solver.config() {
        return Err(Error::InvalidSchedule(
            "schedule configuration differs from the encoded system".into(),
        ));
    }
    if let Some(last) = schedule.phases().last() {
        if last.rank > solver.svd().rank() {
            return Err(Error::RankOutOfRange {
                rank: last.rank,
                max: solver.svd().rank(),
            });
        }
    }
    if reference.len() != solver.problem().dim() {
        return Err(Error::DimensionMismatch {
            expected: solver.problem().dim(),
            actual: reference.len(),
        });
    }

    let mut rng = SeededRng::new(seed);
    let mut x = DVector::zeros(solver.problem().dim());
    let mut records = Vec::with_capacity(schedule.total_iterations());
    let mut clock = 0.0;
    let mut k = 0;
    'phases: for (r, phase) in schedule.phases().iter().enumerate() {
        for _ in 0..phase.iterations {
            let out = solver.sequential_matvec(&x, phase, model, &mut rng)?;
            let mut iter_time = out.elapsed;
            if opts.charge_second_round {
                iter_time += simulate_wait(model, solver.config().workers(), phase.responders, &mut rng).elapsed;
            }
            x = solver.prox_step(&x, &out.product);
            clock += iter_time;
            k += 1;
            let suboptimality = normalized_suboptimality(&x, reference);
            records.push(IterationRecord {
                iteration: k,
                phase: r + 1,
                iter_time,
                cum_time: clock,
                objective: solver.problem().objective(&x),
                suboptimality,
            });
            if opts.stop_below.is_some_and(|level| suboptimality <= level) {
                break 'phases;
            }
        }
    }
    Ok(RunTrace { records, final_x: x })
}

/// The exact method: rank `d` every iteration, waiting for the fewest workers
/// that hold all `d` rows.
pub fn run_baseline(
    solver: &CodedLasso,
    model: &LatencyModel,
    seed: u64,
    iterations: usize,
    reference: &DVector<f64>,
    opts: RunOptions,
) -> Result<RunTrace> {
    let schedule = baseline_schedule(solver, iterations)?;
    run_sequential(solver, &schedule, model, seed, reference, opts)
}

pub fn baseline_schedule(solver: &CodedLasso, iterations: usize) -> Result<ApproxSchedule> {
    let d = solver.svd().rank();
    let responders = solver.exact_responders().ok_or_else(|| {
        Error::InvalidSchedule(format!("configuration {} cannot recover all {d} rows", solver.config()))
    })?;
    ApproxSchedule::new(
        vec![Phase {
            rank: d,
            iterations,
            responders,
        }],
        solver.config().clone(),
    )
}
