//! Statistical distance between finite distributions, exact or estimated.
//!
//! The privacy claims are statements about total variation distance:
//! "the coalition's view of a query is the same distribution whatever the
//! retrieval index" and "the simulator's output matches the real view". At
//! small parameters both claims are decidable — every distribution here is a
//! deterministic function of an enumerable randomness configuration — so the
//! exhaustive mode computes TV distance *exactly*, in integer arithmetic,
//! and the equality claims in the acceptance tests are claims about the
//! integer 0, not about a float being small.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::games::report::Frequency;
use crate::games::EXHAUSTIVE_CONFIG_CAP;
use crate::rng::{mix_seed, seeded_rng, RandomSource};
use crate::scheme::{
    generate_queries, generate_queries_with_randomness, simulate_queries,
    simulate_queries_from_config, simulator_config_count, Query, QueryRandomness, SchemeParams,
};

/// A distribution over a finite, encodable outcome space, driven either by
/// an enumerable configuration index or by a random source.
///
/// `outcome_at(c)` for uniform c over `0..config_count()` must be
/// distributed identically to `sample(rng)` — enumeration and sampling are
/// two views of the same distribution.
pub trait FiniteDistribution {
    /// Identifies the outcome space. Distances are only defined between
    /// distributions whose supports agree, and the identifier is how that
    /// agreement is checked — it must describe the outcome encoding, not
    /// the distribution itself.
    fn support_id(&self) -> String;

    /// Number of equally likely randomness configurations.
    fn config_count(&self) -> Result<u128>;

    /// The outcome produced by configuration `config`.
    fn outcome_at(&self, config: u128) -> Result<Vec<u64>>;

    /// One random outcome.
    fn sample(&self, rng: &mut RandomSource) -> Result<Vec<u64>>;
}

/// How to compare two distributions.
#[derive(Debug, Clone, Copy)]
pub enum DistanceMode {
    /// Walk both configuration spaces completely; the result is exact.
    Exhaustive,
    /// Draw `trials` outcomes from each side and report the plug-in
    /// estimate with a confidence half-width.
    Sampled { trials: u64, seed: u64 },
}

/// Result of a distance computation.
#[derive(Debug, Clone, Copy)]
pub struct DistanceReport {
    /// Total variation distance as an exact fraction (exhaustive mode) or
    /// the empirical plug-in estimate (sampled mode).
    pub distance: Frequency,
    /// True iff the value is exact rather than estimated.
    pub exact: bool,
    /// Heuristic 4σ-style half-width for the sampled estimate.
    pub ci_halfwidth: Option<f64>,
    /// Configurations or samples drawn on each side.
    pub observations: (u128, u128),
}

/// Total variation distance between two distributions over the same support.
///
/// Exhaustive mode enumerates both spaces (sizes N_a, N_b, each capped at
/// [`EXHAUSTIVE_CONFIG_CAP`]) and evaluates
/// TV = Σ_o |count_a(o)·N_b − count_b(o)·N_a| / (2·N_a·N_b)
/// in integer arithmetic, reduced to lowest terms.
pub fn total_variation_distance(
    a: &dyn FiniteDistribution,
    b: &dyn FiniteDistribution,
    mode: DistanceMode,
) -> Result<DistanceReport> {
    if a.support_id() != b.support_id() {
        return Err(Error::SupportMismatch(a.support_id(), b.support_id()));
    }
    match mode {
        DistanceMode::Exhaustive => {
            let n_a = checked_space(a.config_count()?)?;
            let n_b = checked_space(b.config_count()?)?;
            let mut hist_a: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
            for config in 0..n_a {
                *hist_a.entry(a.outcome_at(config)?).or_insert(0) += 1;
            }
            let mut hist_b: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
            for config in 0..n_b {
                *hist_b.entry(b.outcome_at(config)?).or_insert(0) += 1;
            }
            Ok(DistanceReport {
                distance: histogram_distance(&hist_a, n_a, &hist_b, n_b),
                exact: true,
                ci_halfwidth: None,
                observations: (n_a, n_b),
            })
        }
        DistanceMode::Sampled { trials, seed } => {
            let mut rng_a = seeded_rng(mix_seed(&[seed, 0xa]));
            let mut rng_b = seeded_rng(mix_seed(&[seed, 0xb]));
            let mut hist_a: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
            let mut hist_b: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
            for _ in 0..trials {
                *hist_a.entry(a.sample(&mut rng_a)?).or_insert(0) += 1;
                *hist_b.entry(b.sample(&mut rng_b)?).or_insert(0) += 1;
            }
            let n = trials as u128;
            // Plug-in TV concentrates around its mean within O(1/sqrt(N))
            // per side (bounded differences); 2/sqrt(N) each is a
            // conservative 4σ-style width.
            let ci = 2.0 * (1.0 / (trials as f64).sqrt() + 1.0 / (trials as f64).sqrt());
            Ok(DistanceReport {
                distance: histogram_distance(&hist_a, n, &hist_b, n),
                exact: false,
                ci_halfwidth: Some(ci),
                observations: (n, n),
            })
        }
    }
}

fn checked_space(count: u128) -> Result<u128> {
    if count > EXHAUSTIVE_CONFIG_CAP {
        return Err(Error::ExhaustiveSpaceTooLarge {
            needed: count,
            cap: EXHAUSTIVE_CONFIG_CAP,
        });
    }
    Ok(count)
}

/// Exact TV distance between two observation histograms, via the
/// cross-multiplied integer form (no division until the final reduction).
fn histogram_distance(
    hist_a: &BTreeMap<Vec<u64>, u128>,
    n_a: u128,
    hist_b: &BTreeMap<Vec<u64>, u128>,
    n_b: u128,
) -> Frequency {
    let mut numerator: u128 = 0;
    let outcomes: BTreeSet<&Vec<u64>> = hist_a.keys().chain(hist_b.keys()).collect();
    for outcome in outcomes {
        let c_a = hist_a.get(outcome).copied().unwrap_or(0);
        let c_b = hist_b.get(outcome).copied().unwrap_or(0);
        numerator += (c_a * n_b).abs_diff(c_b * n_a);
    }
    let denominator = 2 * n_a * n_b;
    let g = numerator.gcd(&denominator);
    Frequency::new(numerator / g, denominator / g)
}

/// The coalition's view of real queries for a fixed retrieval index: the
/// concatenated data and tag shares of every coalition member, ascending.
#[derive(Debug, Clone)]
pub struct RealQueryView {
    params: SchemeParams,
    index: usize,
    members: BTreeSet<usize>,
}

impl RealQueryView {
    /// View of the queries for `index` restricted to `members`.
    pub fn new(params: SchemeParams, index: usize, members: BTreeSet<usize>) -> Self {
        Self {
            params,
            index,
            members,
        }
    }
}

/// Encodes a coalition's share view as a flat word vector, members ascending.
fn encode_view(members: &BTreeSet<usize>, query_of: impl Fn(usize) -> Query) -> Vec<u64> {
    let mut out = Vec::new();
    for &j in members {
        let q = query_of(j);
        out.extend(q.data_shares().iter().map(|e| e.value()));
        out.extend(q.tag_shares().iter().map(|e| e.value()));
    }
    out
}

fn view_support_id(params: SchemeParams, members: &BTreeSet<usize>) -> String {
    // Same modulus, same database length, same observed servers — that is
    // the whole outcome encoding. Deliberately excludes the retrieval index
    // and whether shares are real or simulated.
    format!(
        "query-view p={} n={} members={:?}",
        params.field().modulus(),
        params.database_len(),
        members
    )
}

impl FiniteDistribution for RealQueryView {
    fn support_id(&self) -> String {
        view_support_id(self.params, &self.members)
    }

    fn config_count(&self) -> Result<u128> {
        QueryRandomness::config_count(self.params).ok_or(Error::ExhaustiveSpaceOverflow)
    }

    fn outcome_at(&self, config: u128) -> Result<Vec<u64>> {
        let randomness = QueryRandomness::from_config(self.params, config);
        let (queries, _) = generate_queries_with_randomness(self.params, self.index, &randomness)?;
        Ok(encode_view(&self.members, |j| queries[j - 1].clone()))
    }

    fn sample(&self, rng: &mut RandomSource) -> Result<Vec<u64>> {
        let (queries, _) = generate_queries(self.params, self.index, rng)?;
        Ok(encode_view(&self.members, |j| queries[j - 1].clone()))
    }
}

/// The simulated coalition view: what the query simulator hands a coalition,
/// with no retrieval index anywhere in sight.
#[derive(Debug, Clone)]
pub struct SimulatedQueryView {
    params: SchemeParams,
    members: BTreeSet<usize>,
}

impl SimulatedQueryView {
    /// Simulated view for `members`.
    pub fn new(params: SchemeParams, members: BTreeSet<usize>) -> Self {
        Self { params, members }
    }
}

impl FiniteDistribution for SimulatedQueryView {
    fn support_id(&self) -> String {
        view_support_id(self.params, &self.members)
    }

    fn config_count(&self) -> Result<u128> {
        simulator_config_count(self.params, self.members.len())
            .ok_or(Error::ExhaustiveSpaceOverflow)
    }

    fn outcome_at(&self, config: u128) -> Result<Vec<u64>> {
        let queries = simulate_queries_from_config(self.params, &self.members, config)?;
        Ok(encode_view(&self.members, |j| queries[&j].clone()))
    }

    fn sample(&self, rng: &mut RandomSource) -> Result<Vec<u64>> {
        let queries = simulate_queries(self.params, &self.members, rng)?;
        Ok(encode_view(&self.members, |j| queries[&j].clone()))
    }
}
