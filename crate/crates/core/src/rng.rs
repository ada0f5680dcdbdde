//! Deterministic randomness plumbing for reproducible experiments.
//!
//! Every experiment takes a single master seed and derives per-trial,
//! per-role seeds from it, so that replaying a trial (for hybrid coupling)
//! or re-running a whole experiment is bit-for-bit reproducible. The
//! derivation is a splitmix64-style mixer — well spread, *not*
//! cryptographic; the unpredictability of protocol randomness is irrelevant
//! here because the games are information-theoretic and the adversaries are
//! part of the same program.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used everywhere randomness is actually consumed.
///
/// ChaCha with a fixed seed gives identical streams on every platform, which
/// keeps reports reproducible across machines (a plain `StdRng` documents no
/// such stability guarantee).
pub type RandomSource = ChaCha8Rng;

/// Builds the standard deterministic RNG from a single seed.
pub fn seeded_rng(seed: u64) -> RandomSource {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes an ordered sequence of integers (master seed, trial number, role
/// tag, ...) into one derived seed.
///
/// Order matters: `mix_seed(&[a, b])` and `mix_seed(&[b, a])` differ, so
/// roles and trial indices cannot collide by swapping.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut acc: u64 = 0x0b56_79f9_73cd_6c27;
    for &part in parts {
        acc = splitmix64(acc.wrapping_add(part));
    }
    acc
}

/// The splitmix64 finalizer: a bijective avalanche mix on 64 bits.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
