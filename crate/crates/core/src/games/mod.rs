//! Executable security experiments.
//!
//! The security claims of the protocol are stated as games: a correctness
//! check, an integrity game (can a malicious coalition make the client
//! accept a *wrong* value?), and a pair of real/ideal selective-failure
//! experiments whose closeness defines privacy in the presence of the
//! accept/reject leak. This module runs those games literally, against
//! pluggable two-stage adversaries, in two modes:
//!
//! * **Sampled** — Monte Carlo over a seeded, reproducible trial schedule,
//!   reported with binomial-style confidence half-widths.
//! * **Exhaustive** — full enumeration of every randomness configuration
//!   (client coefficients, adversary guesses, simulator draws), yielding
//!   exact rational frequencies. Enumeration refuses spaces larger than
//!   [`EXHAUSTIVE_CONFIG_CAP`] rather than silently sampling.
//!
//! The hybrid runner chains the four experiments of the privacy argument
//! (real → real-with-exact-match-bit → simulated → ideal) under a shared
//! per-trial seed schedule, so consecutive hybrids can be compared trial by
//! trial, not just in aggregate.

pub mod adversary;
pub mod distance;
pub mod experiments;
pub mod report;

pub use adversary::{
    adversary_by_name, Adversary, AttackContext, Coalition, CoalitionRole, FlipDataAdversary,
    FlipTagAdversary, HonestAdversary, OracleCheaterAdversary, ProbeAdversary, TagGuessAdversary,
    TrialRandomness, BUILTIN_ADVERSARIES,
};
pub use distance::{
    total_variation_distance, DistanceMode, DistanceReport, FiniteDistribution, RealQueryView,
    SimulatedQueryView,
};
pub use experiments::{
    run_correctness, run_hybrids, run_ideal_experiment, run_integrity_game,
    run_integrity_offset_sweep, run_real_experiment, run_selective_failure_experiment, TrialMode,
};
pub use report::{ExperimentReport, Frequency, ReportMode};

/// Largest number of configurations any exhaustive enumeration will walk.
///
/// 2^24 single-retrieval evaluations complete in seconds; anything beyond
/// that must be an explicit Monte Carlo decision by the caller, because an
/// "exhaustive" run that secretly samples would turn exactness claims into
/// silent lies.
pub const EXHAUSTIVE_CONFIG_CAP: u128 = 1 << 24;
