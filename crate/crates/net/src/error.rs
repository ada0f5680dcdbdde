//! Error type for persistence and transport.
//!
//! The split that matters: a client rejecting tampered answers is the
//! protocol outcome ⊥ (a successful retrieval result), while everything in
//! this enum is an *availability* failure — the retrieval never completed.
//! Conflating the two would corrupt every integrity-rate measurement built
//! on top of the client, so transport problems are errors and ⊥ never is.

use thiserror::Error;

/// Everything that can go wrong reading files, parsing frames, or talking
/// to servers.
#[derive(Debug, Error)]
pub enum NetError {
    /// Underlying socket or filesystem failure.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// A database file violates the layout: bad magic, unknown version,
    /// truncation, or trailing bytes.
    #[error("database file format: {0}")]
    Format(String),

    /// Structurally well-formed data carrying invalid values (an element
    /// not reduced below the modulus, a non-prime modulus, …).
    #[error("validation: {0}")]
    Validation(String),

    /// A wire frame that cannot be parsed: short header, body length
    /// disagreeing with its type, unknown frame type.
    #[error("malformed frame: {0}")]
    Malformed(String),

    /// The peer answered with an ERROR frame instead of an ANSWER.
    #[error("server reported error code {code}")]
    ServerError {
        /// Wire error code; see the constants in [`crate::wire`].
        code: u16,
    },

    /// Failures propagated from the scheme itself (bad parameters, shape
    /// mismatches).
    #[error(transparent)]
    Core(#[from] itapir_core::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, NetError>;
