use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid partition `{input}`: {reason}")]
    InvalidPartition { input: String, reason: String },

    #[error("player {player} has no actions for partition {partition}")]
    MissingActions { player: usize, partition: String },

    #[error("non-finite payoff in {context}")]
    NonFinitePayoff { context: String },

    #[error("invalid payoff entry: {0}")]
    InvalidPayoff(String),

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),

    #[error("invalid mixed strategy: {0}")]
    InvalidMixedStrategy(String),

    /// An exhaustive computation would exceed the configured budget.
    #[error("{what} requires {required} evaluations but the budget is {budget}")]
    TooLarge {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    /// The direct and the partition-decomposed expected utilities disagree,
    /// which means the formation rule does not split the profile space cleanly.
    #[error(
        "expected utility of player {player} disagrees: direct {direct}, by partition {by_partition}"
    )]
    Inconsistent {
        player: usize,
        direct: f64,
        by_partition: f64,
    },
}
