use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),

    #[error("node `{node}`: empty-set value must be 0 (got {value})")]
    EmptySetValue { node: String, value: f64 },

    #[error("node `{node}`: value {value} outside [0, 1]")]
    OutOfRange { node: String, value: f64 },

    #[error("node `{node}`: {reason}")]
    InvalidActivation { node: String, reason: String },

    #[error("node `{node}`: table is not monotone ({detail})")]
    NonMonotone { node: String, detail: String },

    #[error("node `{node}`: success probabilities are order-dependent ({detail})")]
    OrderDependent { node: String, detail: String },

    #[error("invalid threshold cdf: {0}")]
    InvalidCdf(String),

    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("domain of size {size} exceeds the limit of {limit}")]
    DomainTooLarge { size: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid stage plan: {0}")]
    InvalidPlan(String),

    #[error("requested {k} seeds from a network with {n} nodes")]
    TooManySeeds { k: usize, n: usize },

    #[error("evaluation budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("no submodularity violation at the given pair: {0}")]
    NoViolation(String),

    #[error("trace does not match network: {0}")]
    TraceMismatch(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
