use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by machine execution and analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("program line must hold at least one instruction")]
    EmptyLine,

    #[error("choice {choice} out of range on line {line} ({available} available)")]
    ChoiceOutOfRange {
        line: usize,
        choice: usize,
        available: usize,
    },

    #[error("line {line} has {choices} choices; a deterministic program needs exactly one")]
    NotDeterministic { line: usize, choices: usize },

    #[error("configuration is halted (counter {counter})")]
    AlreadyHalted { counter: usize },

    #[error("node {0} is not part of this tree")]
    NodeNotInTree(usize),

    #[error("trace disagrees with the program at step {step}")]
    TraceMismatch { step: usize },

    #[error("weights on line {line} do not form a distribution (sum {sum})")]
    Weight { line: usize, sum: String },

    #[error("choice sequence ran out at step {step}")]
    SequenceExhausted { step: u64 },

    #[error("exploration exceeded the cap of {cap} states")]
    BudgetExceeded { cap: u64 },

    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonOutOfRange(String),

    #[error("eta must lie in (0, 1/2), got {0}")]
    EtaOutOfRange(String),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}
