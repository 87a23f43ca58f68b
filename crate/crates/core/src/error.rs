use thiserror::Error;

use crate::lattice::BallCensus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} = {value} is outside the supported range (max {max})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        max: f64,
    },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// The node budget ran out; `partial` holds what was counted before stopping.
    #[error("node budget of {budget} exhausted ({} points counted so far)", partial.count)]
    BudgetExhausted { budget: u64, partial: Box<BallCensus> },

    /// A cover walk expanded more nodes than allowed.
    #[error("cover walk node budget of {budget} exhausted")]
    WalkBudget { budget: u64 },

    #[error("surface is disconnected")]
    Disconnected,

    /// Some vertices were not reached within the radius cap.
    #[error("{unreached} vertices unreached within radius cap {radius_cap}")]
    Incomplete {
        unreached: usize,
        radius_cap: f64,
        eccentricities: Vec<Option<f64>>,
    },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
