//! Coded sequential distributed matrix-vector multiplication and a
//! sequential-approximation lasso solver running on a simulated straggler
//! cluster.

pub mod cluster;
pub mod codec;
pub mod error;
pub mod feasibility;
pub mod harness;
pub mod solver;

pub use cluster::{LatencyModel, RoundOutcome, SeededRng};
pub use codec::{EncodedSystem, SourceMatrices, WorkerMatrix, WorkerResult};
pub use error::{Error, Result};
pub use feasibility::{Configuration, RankTarget, RowBudget};
