//! Simulated straggler cluster: i.i.d. worker finish times per round and the
//! order statistics that set how long the user waits for `l` responders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Distribution of one worker's task time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatencyModel {
    /// Density `rate * exp(-rate * x)`.
    Exponential {
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    /// `shift + Exp(rate)`.
    ShiftedExponential {
        shift: f64,
        rate: f64,
    },
}

impl LatencyModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        let m = Self::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        let m = Self::Deterministic { value };
        m.validate()?;
        Ok(m)
    }

    pub fn shifted_exponential(shift: f64, rate: f64) -> Result<Self> {
        let m = Self::ShiftedExponential { shift, rate };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad_rate = |r: f64| !(r.is_finite() && r > 0.0);
        match *self {
            Self::Exponential { rate } if bad_rate(rate) => {
                Err(Error::InvalidLatency(format!("rate must be positive, got {rate}")))
            }
            Self::ShiftedExponential { rate, .. } if bad_rate(rate) => {
                Err(Error::InvalidLatency(format!("rate must be positive, got {rate}")))
            }
            Self::ShiftedExponential { shift, .. } if !(shift.is_finite() && shift >= 0.0) => Err(
                Error::InvalidLatency(format!("shift must be non-negative, got {shift}")),
            ),
            Self::Deterministic { value } if !(value.is_finite() && value >= 0.0) => Err(Error::InvalidLatency(
                format!("value must be non-negative, got {value}"),
            )),
            _ => Ok(()),
        }
    }

    /// Inverse-CDF draw from `u` in `(0, 1]`.
    pub fn quantile_draw(&self, u: f64) -> f64 {
        match *self {
            Self::Exponential { rate } => -u.ln() / rate,
            Self::Deterministic { value } => value,
            Self::ShiftedExponential { shift, rate } => shift - u.ln() / rate,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Deterministic { .. } => "deterministic",
            Self::ShiftedExponential { .. } => "shifted-exponential",
        }
    }
}

/// Seeded source of per-round latency draws.
///
/// Round `r` reads from ChaCha stream `r`, and worker `w` takes the `w`-th
/// draw of that stream, so any round can be replayed in isolation.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    round: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, round: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rounds consumed so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Uniform draws in `(0, 1]` for every worker of the next round.
    pub fn next_round(&mut self, workers: usize) -> Vec<f64> {
        let u = self.round_uniforms(self.round, workers);
        self.round += 1;
        u
    }

    pub fn round_uniforms(&self, round: u64, workers: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(round);
        (0..workers).map(|_| 1.0 - rng.random::<f64>()).collect()
    }
}

/// Finish times of one round and their sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub finish_times: Vec<f64>,
    /// Worker indices (0-based) in arrival order, ties by index.
    pub arrival: Vec<usize>,
}

impl RoundOutcome {
    pub fn from_times(finish_times: Vec<f64>) -> Self {
        let mut arrival: Vec<usize> = (0..finish_times.len()).collect();
        arrival.sort_by(|&a, &b| finish_times[a].total_cmp(&finish_times[b]).then(a.cmp(&b)));
        Self { finish_times, arrival }
    }

    pub fn workers(&self) -> usize {
        self.finish_times.len()
    }

    pub fn sorted_times(&self) -> Vec<f64> {
        self.arrival.iter().map(|&w| self.finish_times[w]).collect()
    }

    /// `T_(l)`, the `l`-th smallest finish time (1-based).
    pub fn elapsed(&self, responders: usize) -> f64 {
        self.finish_times[self.arrival[responders - 1]]
    }

    /// 1-based ids of the first `responders` workers to finish, ascending.
    pub fn responders(&self, responders: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = self.arrival[..responders].iter().map(|&w| w + 1).collect();
        ids.sort_unstable();
        ids
    }
}

pub fn sample_round(model: &LatencyModel, workers: usize, rng: &mut SeededRng) -> RoundOutcome {
    assert!(workers >= 1);
    let times = rng
        .next_round(workers)
        .into_iter()
        .map(|u| model.quantile_draw(u))
        .collect();
    RoundOutcome::from_times(times)
}

/// Expected `T_(l)` for i.i.d. exponential times:
/// `(1/rate) * sum_{j=L-l+1}^{L} 1/j`.
pub fn order_stat_mean(model: &LatencyModel, workers: usize, responders: usize) -> Result<f64> {
    let rate = match *model {
        LatencyModel::Exponential { rate } => rate,
        _ => return Err(Error::UnsupportedModel(model.name())),
    };
    if responders == 0 || responders > workers {
        return Err(Error::LevelOutOfRange {
            level: responders,
            workers,
        });
    }
    let sum: f64 = (workers - responders + 1..=workers).map(|j| 1.0 / j as f64).sum();
    Ok(sum / rate)
}

/// Wait for `responders` workers: elapsed `T_(l)` and who answered.
#[derive(Debug, Clone, PartialEq)]
pub struct Wait {
    pub elapsed: f64,
    pub responders: Vec<usize>,
    pub round: RoundOutcome,
}

pub fn simulate_wait(model: &LatencyModel, workers: usize, responders: usize, rng: &mut SeededRng) -> Wait {
    assert!((1..=workers).contains(&responders));
    let round = sample_round(model, workers, rng);
    Wait {
        elapsed: round.elapsed(responders),
        responders: round.responders(responders),
        round,
    }
}
