//! Core library of a multi-server information-theoretically authenticated
//! PIR toolkit.
//!
//! A client retrieves block x_α from ℓ servers holding replicas of the same
//! database, such that
//!
//! * **privacy** — any coalition of up to t servers learns nothing about α,
//!   even when it later observes whether the client accepted or rejected
//!   (resilience against selective-failure attacks), and
//! * **integrity** — any coalition of up to ℓ−1 servers can make the client
//!   output a *wrong* value (rather than x_α or the rejection verdict ⊥)
//!   with probability at most w/(p−1).
//!
//! The construction shares the selection vector twice: once at degree t (the
//! data channel) and once, scaled by a secret key, at degree ℓ−1 (the tag
//! channel, a one-time multiplicative MAC). [`scheme`] implements the three
//! protocol algorithms, [`sharing`] and [`field`] supply the algebra, and
//! [`games`] turns the security definitions themselves — correctness,
//! integrity, and the real/ideal selective-failure experiments with their
//! hybrid argument — into runnable, measurable experiments.
//!
//! Networked operation (wire format, persistence, servers, tamper proxies,
//! CLI) lives in the companion crates.

pub mod error;
pub mod field;
pub mod games;
pub mod rng;
pub mod scheme;
pub mod sharing;

pub use error::{Error, Result};
