//! Error type shared by all engine stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input while ingesting a raw edge list.
    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    /// Input exceeds fixed-width limits (e.g. more than 2^32 vertices).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// I/O failure outside a pass.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// I/O failure in the middle of a pass. The pass is not counted.
    #[error("i/o error during pass (pass not counted): {source}")]
    PartialPass { source: std::io::Error },

    /// A sampling step would exceed the configured memory budget.
    #[error(
        "memory budget exceeded in iteration {iteration}: \
         {needed_words} words needed, budget is {budget_words} \
         (rerun with a budget of at least {needed_words} words)"
    )]
    Budget {
        iteration: u64,
        needed_words: u64,
        budget_words: u64,
    },

    /// Internal state contradicts a structural guarantee.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    /// An exact routine refused an input outside its size guards.
    #[error("guard refusal: {0}")]
    Guard(String),

    /// Invalid parameters or mismatched dimensions.
    #[error("validation error: {0}")]
    Validation(String),

    /// The graph contains no k-graphlet (normalizer Z = 0).
    #[error("no k-graphlet exists (Z = 0)")]
    NoGraphlets,
}
