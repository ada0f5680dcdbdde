//! Crate-wide error type.
//!
//! Protocol outcomes (a client rejecting tampered answers with ⊥) are *not*
//! errors; they are ordinary values of [`crate::scheme::RetrievalResult`].
//! Errors signal misuse of an API or an infeasible request, never a verdict
//! of the verification logic.

use thiserror::Error;

/// Everything that can go wrong inside the core library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Modulus failed the deterministic primality test.
    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    /// Modulus too large for overflow-free 128-bit intermediates.
    #[error("modulus {0} does not fit below 2^{bits}", bits = crate::field::MAX_MODULUS_BITS)]
    ModulusTooLarge(u64),

    /// A raw integer was not a canonical residue of the target field.
    #[error("value {value} is not a canonical residue modulo {modulus}")]
    ValueOutOfRange { value: u64, modulus: u64 },

    /// Zero has no multiplicative inverse.
    #[error("zero is not invertible")]
    ZeroInverse,

    /// Interpolation-style operations need pairwise distinct x-coordinates.
    #[error("evaluation points must be distinct, {0} repeats")]
    DuplicatePoint(u64),

    /// The point 0 is reserved for the secret and never a share point.
    #[error("evaluation point 0 is reserved for the secret")]
    ZeroPoint,

    /// An operation was handed fewer points or shares than it needs.
    #[error("{what}: need at least {needed}, got {got}")]
    InsufficientPoints {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// A degree bound incompatible with the available points.
    #[error("degree {degree} is not reconstructible from {points} points")]
    DegreeTooHigh { degree: usize, points: usize },

    /// Scheme parameters violating one of their invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A retrieval index outside 1..=n.
    #[error("retrieval index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// Inputs whose dimensions do not line up (database vs. query vs. answers).
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A coalition that violates its role's cardinality bound or range.
    #[error("invalid coalition: {0}")]
    InvalidCoalition(String),

    /// An adversary was asked to run in a regime where its strategy is undefined.
    #[error("adversary {name} is infeasible here: {what}")]
    AdversaryInfeasible { name: &'static str, what: String },

    /// An adversary substituted answers for servers outside its coalition.
    #[error("adversary substituted an answer for server {server}, which is outside the coalition")]
    SubstitutionOutsideCoalition { server: usize },

    /// Exhaustive enumeration was requested over a space we refuse to walk.
    ///
    /// Exactness claims must never silently degrade into sampling, so the
    /// caller has to choose: shrink the parameters or switch to Monte Carlo.
    #[error("exhaustive enumeration needs {needed} configurations, cap is {cap}")]
    ExhaustiveSpaceTooLarge { needed: u128, cap: u128 },

    /// The enumeration space does not even fit in a u128.
    #[error("exhaustive enumeration space overflows a 128-bit counter")]
    ExhaustiveSpaceOverflow,

    /// Two distributions compared over different supports.
    #[error("distribution supports differ: {0} vs {1}")]
    SupportMismatch(String, String),

    /// Generic misuse that does not fit a more specific variant.
    #[error("usage: {0}")]
    Usage(String),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
