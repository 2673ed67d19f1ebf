use num_bigint::BigUint;

use crate::model::AgentId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A model, policy or instance document could not be read.
    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("expected a model with {expected} agent(s), found {found}")]
    Arity { expected: usize, found: usize },

    #[error("agent {agent} has no decision for reachable history {history:?}")]
    UndefinedDecision { agent: AgentId, history: Vec<String> },

    #[error("agent {agent} chooses unavailable action `{action}` after history {history:?}")]
    UnavailableAction {
        agent: AgentId,
        history: Vec<String>,
        action: String,
    },

    #[error("policy space holds {count} joint policies, over the budget of {budget}")]
    BudgetExceeded { count: BigUint, budget: u64 },

    #[error("tiling search gave up after {budget} cell assignments")]
    SearchBudgetExceeded { budget: u64 },

    #[error("horizon {horizon} is not below the state count {states}; pass --allow-long-horizon to override")]
    HorizonPrecondition { horizon: usize, states: usize },

    #[error("observation sequence has probability zero")]
    ZeroProbability,

    #[error("model is not jointly observable: {0}")]
    NotJointlyObservable(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.to_string(),
        }
    }
}
