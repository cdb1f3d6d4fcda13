use thiserror::Error;

/// Errors surfaced by the library API.
///
/// Validation of whole models is reported through diagnostics rather than
/// errors (see `model::validate_model`); this type covers failures of
/// individual operations.
#[derive(Debug, Error)]
pub enum RvError {
    /// Formula text could not be parsed. `pos` is a byte offset into the
    /// input.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A game model violated a structural requirement of an operation.
    #[error("invalid model: {0}")]
    Model(String),

    /// A strategy profile does not fit the game it was supplied for.
    #[error("invalid profile: {0}")]
    Profile(String),

    /// A configurable resource cap was exceeded, typically the automaton
    /// state cap during determinization.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Other malformed input, such as a non-turn-based game handed to the
    /// turn-based oracle.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
