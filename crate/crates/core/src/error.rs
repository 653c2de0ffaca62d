use thiserror::Error;

use crate::game::SwitchTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate link: transmitter and receiver coincide")]
    DegenerateLink,

    #[error("link distance {distance} m is below the {min} m minimum")]
    TooClose { distance: f64, min: f64 },

    #[error("angle {0} deg outside [0, 180]")]
    AngleOutOfRange(f64),

    #[error("unknown noise density unit `{0}`")]
    UnknownUnit(String),

    #[error("index {index} out of range for {what} (len {len})")]
    InvalidIndex {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pair {pair} is already in the target coalition")]
    SameCoalition { pair: usize },

    #[error("coalition not allowed in this strategy space")]
    DisallowedCoalition,

    #[error("exhaustive search needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("coalition formation hit the iteration cap after {} iterations", .0.iterations)]
    CapExhausted(Box<SwitchTrace>),

    #[error("scheme requires at least one cellular user")]
    NoCellularUsers,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("reference value at position {0} is not positive")]
    NonPositiveReference(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
