use thiserror::Error;

use crate::geometry::RobotId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid rational {0:?}")]
    InvalidRational(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("zoom must be strictly positive, got {0}")]
    NonPositiveZoom(String),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("empty configuration")]
    EmptyConfiguration,

    #[error("not three towers: support has {0} locations")]
    NotThreeTowers(usize),

    #[error("unknown robot {id} in a configuration of {robots} robots")]
    UnknownRobot { id: RobotId, robots: usize },

    #[error("malformed demonic action: {0}")]
    MalformedAction(String),

    #[error("fairness bound must be at least 1")]
    ZeroFairnessBound,

    #[error("enumeration budget exceeded: {configurations} configurations > budget {budget}")]
    BudgetExceeded { configurations: u128, budget: u128 },

    #[error("trace format: {0}")]
    TraceFormat(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown robogram {0:?}")]
    UnknownRobogram(String),
}
