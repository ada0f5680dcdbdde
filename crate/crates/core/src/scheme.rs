//! The multi-server authenticated PIR protocol: query generation, server
//! answering, and verified reconstruction.
//!
//! One retrieval works as follows. The client picks a secret nonzero tag key
//! r, Shamir-shares the selection unit vector e_α at degree t (the *data
//! channel*) and the scaled vector r·e_α at degree ℓ−1 (the *tag channel*),
//! and sends server j the two share vectors evaluated at point j. Each server
//! answers with the inner products of every database column against both
//! share vectors. Reconstruction recovers the data value and the tag value by
//! interpolation and accepts only if tag = r · data, componentwise.
//!
//! Why this verifies: any additive attack on the answers shifts the
//! reconstructed data by some Δ and the tag by some Γ, both fixed by the
//! attack and the Lagrange weights. Acceptance of a wrong value requires
//! Γ = r·Δ with Δ ≠ 0 — but the tag channel has degree ℓ−1, so even ℓ−1
//! colluding servers see nothing about r, and a uniform nonzero r satisfies
//! the equation with probability at most 1/(p−1). A union bound over the w
//! block components gives the overall error w/(p−1).
//!
//! Privacy is the classic Shamir argument: any t data-channel shares and any
//! ℓ−1 tag-channel shares are jointly uniform, independent of α. The privacy
//! threshold is t; the tag channel never weakens it because its degree is
//! the maximum reconstructible one.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{consistent_with_degree, FieldElement, PrimeField};
use crate::sharing::{reconstruct_at_zero, share_vector_with_coefficients};

/// Parameters of one protocol instance.
///
/// `security_bits` (κ) only constrains the field size (p ≥ 2^κ); the
/// statistical integrity error is `block_width / (p − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    security_bits: u32,
    servers: usize,
    privacy_threshold: usize,
    database_len: usize,
    block_width: usize,
    field: PrimeField,
}

impl SchemeParams {
    /// Validates and builds a parameter set.
    ///
    /// Requirements: ℓ ≥ 2 servers, privacy threshold 1 ≤ t ≤ ℓ−1, at least
    /// one database block of width ≥ 1, p > ℓ (server points 1..ℓ must be
    /// distinct nonzero residues), and p ≥ 2^κ.
    pub fn new(
        security_bits: u32,
        servers: usize,
        privacy_threshold: usize,
        database_len: usize,
        block_width: usize,
        field: PrimeField,
    ) -> Result<Self> {
        if servers < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 servers, got {servers}"
            )));
        }
        if privacy_threshold < 1 || privacy_threshold > servers - 1 {
            return Err(Error::InvalidParams(format!(
                "privacy threshold {privacy_threshold} outside 1..={}",
                servers - 1
            )));
        }
        if database_len < 1 {
            return Err(Error::InvalidParams("empty database".into()));
        }
        if block_width < 1 {
            return Err(Error::InvalidParams("zero block width".into()));
        }
        if field.modulus() <= servers as u64 {
            return Err(Error::InvalidParams(format!(
                "modulus {} too small for {} server points",
                field.modulus(),
                servers
            )));
        }
        if security_bits >= 64 || field.modulus() < 1u64 << security_bits {
            return Err(Error::InvalidParams(format!(
                "modulus {} below the 2^{} security target",
                field.modulus(),
                security_bits
            )));
        }
        Ok(Self {
            security_bits,
            servers,
            privacy_threshold,
            database_len,
            block_width,
            field,
        })
    }

    /// Builds parameters with κ set to the largest value the field supports
    /// (κ = ⌊log₂ p⌋).
    pub fn with_max_security(
        servers: usize,
        privacy_threshold: usize,
        database_len: usize,
        block_width: usize,
        field: PrimeField,
    ) -> Result<Self> {
        Self::new(
            field.modulus().ilog2(),
            servers,
            privacy_threshold,
            database_len,
            block_width,
            field,
        )
    }

    /// Security parameter κ in bits.
    pub fn security_bits(self) -> u32 {
        self.security_bits
    }

    /// Number of servers ℓ.
    pub fn servers(self) -> usize {
        self.servers
    }

    /// Privacy threshold t: coalitions of up to t servers learn nothing
    /// about the retrieval index.
    pub fn privacy_threshold(self) -> usize {
        self.privacy_threshold
    }

    /// Number of database blocks n.
    pub fn database_len(self) -> usize {
        self.database_len
    }

    /// Block width w in field elements.
    pub fn block_width(self) -> usize {
        self.block_width
    }

    /// The common field of all protocol values.
    pub fn field(self) -> PrimeField {
        self.field
    }

    /// Degree of the data-channel sharing (= t).
    pub fn data_degree(self) -> usize {
        self.privacy_threshold
    }

    /// Degree of the tag-channel sharing (= ℓ−1): reconstructible only from
    /// *all* answers, so no proper coalition learns the tag key.
    pub fn tag_degree(self) -> usize {
        self.servers - 1
    }

    /// The canonical evaluation points 1..ℓ, indexable by server.
    pub fn server_points(self) -> Vec<FieldElement> {
        (1..=self.servers as u64)
            .map(|j| self.field.element(j))
            .collect()
    }

    /// Analytic integrity error bound as the exact fraction w/(p−1):
    /// no coalition of up to ℓ−1 servers can make reconstruction accept a
    /// wrong value with higher probability.
    pub fn integrity_error_bound(self) -> (u64, u64) {
        (self.block_width as u64, self.field.modulus() - 1)
    }

    /// The integrity bound as a float, for report thresholds.
    pub fn integrity_error_bound_f64(self) -> f64 {
        let (num, den) = self.integrity_error_bound();
        num as f64 / den as f64
    }
}

/// The replicated database: n blocks of w field elements each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    field: PrimeField,
    width: usize,
    blocks: Vec<Vec<FieldElement>>,
}

impl Database {
    /// Builds a database from blocks, which must be non-empty, rectangular,
    /// and drawn from `field`.
    pub fn new(field: PrimeField, blocks: Vec<Vec<FieldElement>>) -> Result<Self> {
        let width = blocks.first().map(Vec::len).unwrap_or(0);
        if blocks.is_empty() || width == 0 {
            return Err(Error::ShapeMismatch("database must be non-empty".into()));
        }
        for (i, block) in blocks.iter().enumerate() {
            if block.len() != width {
                return Err(Error::ShapeMismatch(format!(
                    "block {} has width {}, expected {width}",
                    i + 1,
                    block.len()
                )));
            }
            if let Some(stray) = block.iter().find(|e| e.field() != field) {
                return Err(Error::ValueOutOfRange {
                    value: stray.value(),
                    modulus: field.modulus(),
                });
            }
        }
        Ok(Self {
            field,
            width,
            blocks,
        })
    }

    /// Builds a database from raw residues, which must already be canonical
    /// (strictly below the modulus) — the persistence layer relies on this
    /// to reject corrupt files rather than silently reduce.
    pub fn from_values(field: PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let blocks = rows
            .iter()
            .map(|row| row.iter().map(|&v| field.try_element(v)).collect())
            .collect::<Result<Vec<Vec<FieldElement>>>>()?;
        Self::new(field, blocks)
    }

    /// A uniformly random database of the shape demanded by `params`.
    pub fn random<R: Rng + ?Sized>(params: SchemeParams, rng: &mut R) -> Self {
        let field = params.field();
        let blocks = (0..params.database_len())
            .map(|_| {
                (0..params.block_width())
                    .map(|_| field.sample(rng))
                    .collect()
            })
            .collect();
        Self {
            field,
            width: params.block_width(),
            blocks,
        }
    }

    /// The element field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Number of blocks n.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Databases are never empty; this exists for the standard idiom only.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Block width w.
    pub fn width(&self) -> usize {
        self.width
    }

    /// The block at 1-based index `alpha`.
    pub fn block(&self, alpha: usize) -> Result<&[FieldElement]> {
        if alpha < 1 || alpha > self.blocks.len() {
            return Err(Error::IndexOutOfRange {
                index: alpha,
                len: self.blocks.len(),
            });
        }
        Ok(&self.blocks[alpha - 1])
    }

    /// All blocks in index order.
    pub fn blocks(&self) -> &[Vec<FieldElement>] {
        &self.blocks
    }

    /// Checks that this database has exactly the shape `params` describes.
    pub fn check_shape(&self, params: SchemeParams) -> Result<()> {
        if self.field != params.field()
            || self.len() != params.database_len()
            || self.width != params.block_width()
        {
            return Err(Error::ShapeMismatch(format!(
                "database is {}x{} over Z_{}, parameters want {}x{} over Z_{}",
                self.len(),
                self.width,
                self.field.modulus(),
                params.database_len(),
                params.block_width(),
                params.field().modulus()
            )));
        }
        Ok(())
    }
}

/// One server's query: its evaluation point plus the data-channel and
/// tag-channel share vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    server_point: FieldElement,
    data_shares: Vec<FieldElement>,
    tag_shares: Vec<FieldElement>,
}

impl Query {
    /// Assembles a query, checking the two share vectors agree in length and
    /// the evaluation point is a valid share point.
    pub fn new(
        server_point: FieldElement,
        data_shares: Vec<FieldElement>,
        tag_shares: Vec<FieldElement>,
    ) -> Result<Self> {
        if server_point.is_zero() {
            return Err(Error::ZeroPoint);
        }
        if data_shares.len() != tag_shares.len() || data_shares.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "query share vectors have lengths {} and {}",
                data_shares.len(),
                tag_shares.len()
            )));
        }
        Ok(Self {
            server_point,
            data_shares,
            tag_shares,
        })
    }

    /// The server's evaluation point (canonically its 1-based index).
    pub fn server_point(&self) -> FieldElement {
        self.server_point
    }

    /// Data-channel shares, one per database block.
    pub fn data_shares(&self) -> &[FieldElement] {
        &self.data_shares
    }

    /// Tag-channel shares, one per database block.
    pub fn tag_shares(&self) -> &[FieldElement] {
        &self.tag_shares
    }
}

/// The client's private reconstruction state. Never transmitted.
#[derive(Debug, Clone, Copy)]
pub struct Aux {
    index: usize,
    tag_key: FieldElement,
    params: SchemeParams,
}

impl Aux {
    /// The retrieval index α (kept for reporting; reconstruction itself only
    /// uses the tag key).
    pub fn index(self) -> usize {
        self.index
    }

    /// The secret tag key r ≠ 0.
    pub fn tag_key(self) -> FieldElement {
        self.tag_key
    }

    /// The parameters this retrieval runs under.
    pub fn params(self) -> SchemeParams {
        self.params
    }
}

/// One server's answer: inner products of each database column with the two
/// share vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    data: Vec<FieldElement>,
    tag: Vec<FieldElement>,
}

impl Answer {
    /// Assembles an answer; both channels must have the same width ≥ 1.
    pub fn new(data: Vec<FieldElement>, tag: Vec<FieldElement>) -> Result<Self> {
        if data.len() != tag.len() || data.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "answer channels have lengths {} and {}",
                data.len(),
                tag.len()
            )));
        }
        Ok(Self { data, tag })
    }

    /// Data-channel values, one per block component.
    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    /// Tag-channel values, one per block component.
    pub fn tag(&self) -> &[FieldElement] {
        &self.tag
    }
}

/// Outcome of a retrieval: the block, or the rejection verdict ⊥.
///
/// ⊥ is a first-class protocol outcome (detected tampering), not an error;
/// transport failures and API misuse surface as [`Error`] instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RetrievalResult {
    /// The reconstructed block, verified against the tag channel.
    Value(Vec<FieldElement>),
    /// Rejection: at least one answer is inconsistent or fails the tag check.
    Bot,
}

impl RetrievalResult {
    /// True for the rejection verdict.
    pub fn is_bot(&self) -> bool {
        matches!(self, RetrievalResult::Bot)
    }

    /// The block, if accepted.
    pub fn value(&self) -> Option<&[FieldElement]> {
        match self {
            RetrievalResult::Value(block) => Some(block),
            RetrievalResult::Bot => None,
        }
    }
}

/// The complete client randomness of one query generation, made explicit so
/// exhaustive tests can enumerate it.
///
/// A configuration is the tag key r ∈ Z_p \ {0} plus the non-constant
/// coefficients of every sharing polynomial: n·t data-channel and n·(ℓ−1)
/// tag-channel elements, each uniform over Z_p.
#[derive(Debug, Clone)]
pub struct QueryRandomness {
    tag_key: FieldElement,
    data_coefficients: Vec<Vec<FieldElement>>,
    tag_coefficients: Vec<Vec<FieldElement>>,
}

impl QueryRandomness {
    /// Draws a configuration from `rng` exactly as honest query generation
    /// does: first r, then the data coefficients (coordinate-major), then
    /// the tag coefficients.
    pub fn sample<R: Rng + ?Sized>(params: SchemeParams, rng: &mut R) -> Self {
        let field = params.field();
        let n = params.database_len();
        let tag_key = field.sample_nonzero(rng);
        let data_coefficients = (0..n)
            .map(|_| {
                (0..params.data_degree())
                    .map(|_| field.sample(rng))
                    .collect()
            })
            .collect();
        let tag_coefficients = (0..n)
            .map(|_| {
                (0..params.tag_degree())
                    .map(|_| field.sample(rng))
                    .collect()
            })
            .collect();
        Self {
            tag_key,
            data_coefficients,
            tag_coefficients,
        }
    }

    /// Size of the configuration space, (p−1)·p^(n·t)·p^(n·(ℓ−1)), or `None`
    /// if it overflows a u128.
    pub fn config_count(params: SchemeParams) -> Option<u128> {
        let p = params.field().modulus() as u128;
        let n = params.database_len() as u32;
        let digits = n
            .checked_mul(params.data_degree() as u32)?
            .checked_add(n.checked_mul(params.tag_degree() as u32)?)?;
        p.checked_pow(digits)?.checked_mul(p - 1)
    }

    /// Decodes configuration number `config` (mixed radix, in the same order
    /// as [`QueryRandomness::sample`] draws). Bijective over
    /// `0..config_count`.
    pub fn from_config(params: SchemeParams, mut config: u128) -> Self {
        let field = params.field();
        let p = field.modulus() as u128;
        let tag_key = field.element((config % (p - 1)) as u64 + 1);
        config /= p - 1;
        let mut digit = |count: usize| -> Vec<FieldElement> {
            (0..count)
                .map(|_| {
                    let value = (config % p) as u64;
                    config /= p;
                    field.element(value)
                })
                .collect()
        };
        let n = params.database_len();
        let data_coefficients = (0..n).map(|_| digit(params.data_degree())).collect();
        let tag_coefficients = (0..n).map(|_| digit(params.tag_degree())).collect();
        Self {
            tag_key,
            data_coefficients,
            tag_coefficients,
        }
    }
}

/// Query generation: shares the selection vector for `index` under fresh
/// randomness and returns the per-server queries plus the private `Aux`.
pub fn generate_queries<R: Rng + ?Sized>(
    params: SchemeParams,
    index: usize,
    rng: &mut R,
) -> Result<(Vec<Query>, Aux)> {
    let randomness = QueryRandomness::sample(params, rng);
    generate_queries_with_randomness(params, index, &randomness)
}

/// Deterministic core of [`generate_queries`], used directly by the
/// exhaustive enumeration oracles.
pub fn generate_queries_with_randomness(
    params: SchemeParams,
    index: usize,
    randomness: &QueryRandomness,
) -> Result<(Vec<Query>, Aux)> {
    let n = params.database_len();
    if index < 1 || index > n {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    let field = params.field();
    let tag_key = randomness.tag_key;
    if tag_key.is_zero() || tag_key.field() != field {
        return Err(Error::Usage("tag key must be a nonzero element".into()));
    }

    // Selection vector e_index and its tag multiple r·e_index.
    let mut selection = vec![field.zero(); n];
    selection[index - 1] = field.one();
    let mut tagged = vec![field.zero(); n];
    tagged[index - 1] = tag_key;

    let points = params.server_points();
    let data_shares = share_vector_with_coefficients(
        &selection,
        params.data_degree(),
        &points,
        &randomness.data_coefficients,
    )?;
    let tag_shares = share_vector_with_coefficients(
        &tagged,
        params.tag_degree(),
        &points,
        &randomness.tag_coefficients,
    )?;

    let queries = data_shares
        .into_iter()
        .zip(tag_shares)
        .map(|(d, h)| Query {
            server_point: d.server_point(),
            data_shares: d.values().to_vec(),
            tag_shares: h.values().to_vec(),
        })
        .collect();
    Ok((
        queries,
        Aux {
            index,
            tag_key,
            params,
        },
    ))
}

/// Server answering: inner products of every block component against the
/// query's two share vectors. Deterministic.
pub fn answer(database: &Database, query: &Query) -> Result<Answer> {
    if query.data_shares.len() != database.len() {
        return Err(Error::ShapeMismatch(format!(
            "query covers {} blocks, database has {}",
            query.data_shares.len(),
            database.len()
        )));
    }
    if database.field() != query.server_point.field() {
        return Err(Error::ShapeMismatch(
            "query and database use different fields".into(),
        ));
    }
    let field = database.field();
    let w = database.width();
    let mut data = vec![field.zero(); w];
    let mut tag = vec![field.zero(); w];
    for (block, (&f, &h)) in database
        .blocks()
        .iter()
        .zip(query.data_shares.iter().zip(&query.tag_shares))
    {
        for (c, &x) in block.iter().enumerate() {
            data[c] = data[c] + x * f;
            tag[c] = tag[c] + x * h;
        }
    }
    Ok(Answer { data, tag })
}

/// Verified reconstruction from all ℓ answers, in server order.
///
/// Per block component: an optional degree-t consistency pre-check on the
/// data channel (only meaningful when ℓ > t+1 — it is a fast-reject path,
/// not part of the error bound), data reconstruction from the first t+1
/// answers, tag reconstruction from *all* ℓ answers at degree ℓ−1, and the
/// acceptance test tag = r · data. Any failure yields ⊥ for the whole block.
pub fn reconstruct(answers: &[Answer], aux: Aux) -> Result<RetrievalResult> {
    let params = aux.params();
    let ell = params.servers();
    let w = params.block_width();
    if answers.len() != ell {
        return Err(Error::ShapeMismatch(format!(
            "got {} answers for {} servers",
            answers.len(),
            ell
        )));
    }
    for (j, answer) in answers.iter().enumerate() {
        if answer.data.len() != w || answer.tag.len() != w {
            return Err(Error::ShapeMismatch(format!(
                "answer {} has widths {}/{}, expected {w}",
                j + 1,
                answer.data.len(),
                answer.tag.len()
            )));
        }
    }

    let points = params.server_points();
    let t = params.privacy_threshold();
    let mut block = Vec::with_capacity(w);
    for c in 0..w {
        let data_points: Vec<(FieldElement, FieldElement)> = points
            .iter()
            .zip(answers)
            .map(|(&x, a)| (x, a.data[c]))
            .collect();
        if ell > t + 1 && !consistent_with_degree(&data_points, t)? {
            return Ok(RetrievalResult::Bot);
        }
        let data_value = reconstruct_at_zero(&data_points, t)?;

        let tag_points: Vec<(FieldElement, FieldElement)> = points
            .iter()
            .zip(answers)
            .map(|(&x, a)| (x, a.tag[c]))
            .collect();
        let tag_value = reconstruct_at_zero(&tag_points, params.tag_degree())?;

        if tag_value != aux.tag_key() * data_value {
            return Ok(RetrievalResult::Bot);
        }
        block.push(data_value);
    }
    Ok(RetrievalResult::Value(block))
}

/// Query simulation for privacy experiments: the coalition's view without
/// any retrieval index.
///
/// For this scheme the real view of any proper coalition is exactly jointly
/// uniform (t data shares and up to ℓ−1 tag shares of independent uniform
/// polynomials), so the simulator simply draws uniform share vectors.
/// Simulating the full server set is rejected — with all ℓ tag shares the
/// view determines r·e_α and is *not* uniform.
pub fn simulate_queries<R: Rng + ?Sized>(
    params: SchemeParams,
    coalition: &BTreeSet<usize>,
    rng: &mut R,
) -> Result<BTreeMap<usize, Query>> {
    check_simulatable(params, coalition)?;
    let field = params.field();
    let n = params.database_len();
    let mut queries = BTreeMap::new();
    for &j in coalition {
        let data_shares = (0..n).map(|_| field.sample(rng)).collect();
        let tag_shares = (0..n).map(|_| field.sample(rng)).collect();
        queries.insert(
            j,
            Query {
                server_point: field.element(j as u64),
                data_shares,
                tag_shares,
            },
        );
    }
    Ok(queries)
}

/// Size of the simulator's randomness space, p^(2·n·|T|), or `None` on
/// overflow.
pub fn simulator_config_count(params: SchemeParams, coalition_size: usize) -> Option<u128> {
    let p = params.field().modulus() as u128;
    let digits = (2 * params.database_len()).checked_mul(coalition_size)?;
    p.checked_pow(u32::try_from(digits).ok()?)
}

/// Deterministic core of [`simulate_queries`] for the enumeration oracles:
/// decodes configuration `config` into the simulated coalition view, walking
/// members in ascending order, data shares before tag shares.
pub fn simulate_queries_from_config(
    params: SchemeParams,
    coalition: &BTreeSet<usize>,
    mut config: u128,
) -> Result<BTreeMap<usize, Query>> {
    check_simulatable(params, coalition)?;
    let field = params.field();
    let p = field.modulus() as u128;
    let n = params.database_len();
    let mut digit = || -> FieldElement {
        let value = (config % p) as u64;
        config /= p;
        field.element(value)
    };
    let mut queries = BTreeMap::new();
    for &j in coalition {
        let data_shares = (0..n).map(|_| digit()).collect();
        let tag_shares = (0..n).map(|_| digit()).collect();
        queries.insert(
            j,
            Query {
                server_point: field.element(j as u64),
                data_shares,
                tag_shares,
            },
        );
    }
    Ok(queries)
}

fn check_simulatable(params: SchemeParams, coalition: &BTreeSet<usize>) -> Result<()> {
    let ell = params.servers();
    if let Some(&stray) = coalition.iter().find(|&&j| j < 1 || j > ell) {
        return Err(Error::InvalidCoalition(format!(
            "server index {stray} outside 1..={ell}"
        )));
    }
    if coalition.len() >= ell {
        return Err(Error::InvalidCoalition(format!(
            "cannot simulate all {ell} servers; privacy quantifies over proper coalitions"
        )));
    }
    Ok(())
}
