use crate::lp::LpStatus;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),

    #[error("signal {0} is sent with zero probability")]
    ZeroProbabilitySignal(usize),

    #[error("mechanism carries no recommendations")]
    MissingRecommendations,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("menu signals {0} and {1} recommend the same action but carry different contracts; merging them would change the optimum")]
    MenuMergeConflict(usize, usize),

    #[error("LP solve failed with status {0:?}")]
    Lp(LpStatus),

    #[error("enumeration budget exceeded: {got} points > budget {budget}")]
    BudgetExceeded { got: u128, budget: u128 },

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
