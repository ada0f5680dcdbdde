//! Malicious coalitions: the two-stage adversary interface and the built-in
//! strategy family used by the experiments.
//!
//! An adversary corrupts a fixed coalition of servers. Stage one
//! ([`Adversary::substitute`]) sees the database and the coalition's queries
//! and may replace the coalition's answers; stage two ([`Adversary::output`])
//! sees only the client's accept/reject bit and emits the adversary's final
//! output bit β. Determinism is owned by the harness: each trial hands the
//! adversary either a seed or an explicit configuration index, so Monte
//! Carlo runs are reproducible and exhaustive runs can enumerate adversary
//! randomness alongside client randomness.
//!
//! The sharpest built-in strategies exploit the one shape of attack the
//! protocol leaves open. An additive perturbation of the coalition's answers
//! shifts the reconstructed data value by some Δ and the reconstructed tag
//! by some Γ, and is accepted iff Γ = r·Δ. By scaling the interpolation
//! basis polynomial that vanishes on every honest server's point and equals
//! 1 at 0, a coalition facing at most t honest servers can realize *any*
//! (Δ, Γ) it likes — including one that survives the degree-t consistency
//! check — and winning reduces to guessing the tag key r.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::rng::seeded_rng;
use crate::scheme::{answer, Answer, Database, Query, SchemeParams};

/// Which security game a coalition is built for; the role fixes its
/// cardinality bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoalitionRole {
    /// Privacy experiments: at most t members.
    Privacy,
    /// Integrity game: at most ℓ−1 members.
    Integrity,
}

/// A validated set of corrupted server indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    members: BTreeSet<usize>,
    role: CoalitionRole,
}

impl Coalition {
    /// A privacy coalition: members ⊆ 1..=ℓ with |members| ≤ t.
    pub fn privacy(params: SchemeParams, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::validated(
            params,
            members,
            params.privacy_threshold(),
            CoalitionRole::Privacy,
        )
    }

    /// An integrity coalition: members ⊆ 1..=ℓ with |members| ≤ ℓ−1.
    pub fn integrity(
        params: SchemeParams,
        members: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        Self::validated(
            params,
            members,
            params.servers() - 1,
            CoalitionRole::Integrity,
        )
    }

    fn validated(
        params: SchemeParams,
        members: impl IntoIterator<Item = usize>,
        bound: usize,
        role: CoalitionRole,
    ) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&stray) = members.iter().find(|&&j| j < 1 || j > params.servers()) {
            return Err(Error::InvalidCoalition(format!(
                "server index {stray} outside 1..={}",
                params.servers()
            )));
        }
        if members.len() > bound {
            return Err(Error::InvalidCoalition(format!(
                "{:?} coalition of {} members exceeds its bound {bound}",
                role,
                members.len()
            )));
        }
        Ok(Self { members, role })
    }

    /// Corrupted server indices, ascending.
    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    /// The game this coalition was validated for.
    pub fn role(&self) -> CoalitionRole {
        self.role
    }

    /// True iff `server` is corrupted.
    pub fn contains(&self, server: usize) -> bool {
        self.members.contains(&server)
    }
}

/// Per-trial randomness handed to an adversary by the harness.
#[derive(Debug, Clone, Copy)]
pub enum TrialRandomness {
    /// Seed for a derived random stream (Monte Carlo mode).
    Seeded(u64),
    /// Index into the adversary's enumerable randomness space
    /// (exhaustive mode); must be below
    /// [`Adversary::randomness_cardinality`].
    Config(u128),
}

/// Everything stage one of an adversary gets to see.
#[derive(Debug, Clone, Copy)]
pub struct AttackContext<'a> {
    /// The public protocol parameters.
    pub params: SchemeParams,
    /// The full database (servers hold replicas, so the adversary knows it).
    pub database: &'a Database,
    /// The corrupted servers.
    pub coalition: &'a Coalition,
    /// The coalition's queries only — honest servers' queries stay hidden.
    pub queries: &'a BTreeMap<usize, Query>,
    /// The client's tag key, leaked out of band. `None` in every honest
    /// experiment; `Some` only for the reference cheater that calibrates the
    /// tightness of the integrity bound.
    pub leaked_tag_key: Option<FieldElement>,
}

/// A two-stage malicious-coalition strategy.
pub trait Adversary {
    /// Stable identifier used in reports and CLI flags.
    fn name(&self) -> &'static str;

    /// Size of the strategy's own randomness space when enumerated
    /// exhaustively; 1 for deterministic strategies.
    fn randomness_cardinality(&self, params: SchemeParams) -> u128 {
        let _ = params;
        1
    }

    /// True for strategies that must be handed the client's tag key.
    fn wants_leaked_tag_key(&self) -> bool {
        false
    }

    /// Resets per-trial state. Called exactly once before each trial's
    /// [`Adversary::substitute`]; replaying a trial with the same value
    /// must reproduce the same behavior.
    fn begin_trial(&mut self, randomness: TrialRandomness) {
        let _ = randomness;
    }

    /// Stage one: inspect the coalition view and return substituted answers
    /// for any subset of the coalition (missing members answer honestly).
    fn substitute(&mut self, ctx: &AttackContext<'_>) -> Result<BTreeMap<usize, Answer>>;

    /// Stage two: the final output bit β, computed from the accept/reject
    /// bit. Defaults to β = b, the choice that maximizes what the
    /// acceptance leak can reveal.
    fn output(&mut self, accepted: bool) -> bool {
        accepted
    }
}

/// Evaluations, at each coalition point, of the interpolation basis
/// polynomial that is 1 at 0 and 0 at every honest server's point:
/// z(X) = Π_h (X − h) / (0 − h) over honest points h.
///
/// Adding `offset · z(j)` to the answers of every coalition member j shifts
/// the value reconstructed at 0 by exactly `offset` while leaving honest
/// points untouched. z has degree ℓ − |coalition|, so the perturbed data
/// channel still passes the degree-t consistency check iff
/// ℓ − |coalition| ≤ t.
fn vanishing_basis(
    params: SchemeParams,
    members: &BTreeSet<usize>,
) -> Result<BTreeMap<usize, FieldElement>> {
    let field = params.field();
    let honest: Vec<FieldElement> = (1..=params.servers())
        .filter(|j| !members.contains(j))
        .map(|j| field.element(j as u64))
        .collect();
    let mut basis = BTreeMap::new();
    for &j in members {
        let x = field.element(j as u64);
        let mut num = field.one();
        let mut den = field.one();
        for &h in &honest {
            num = num * (x - h);
            den = den * (field.zero() - h);
        }
        basis.insert(j, num * den.inverse().expect("honest points are nonzero"));
    }
    Ok(basis)
}

/// Shared forging recipe: perturb the coalition's honest answers so the
/// client's reconstruction of `component` shifts by `data_offset` on the
/// data channel and `tag_offset` on the tag channel.
///
/// Feasibility: a nonzero data shift must survive the degree-t consistency
/// check, which needs at most t honest servers (ℓ − |coalition| ≤ t). The
/// tag channel interpolates at degree ℓ−1, so it imposes no constraint.
fn forge_substitution(
    ctx: &AttackContext<'_>,
    name: &'static str,
    component: usize,
    data_offset: FieldElement,
    tag_offset: FieldElement,
) -> Result<BTreeMap<usize, Answer>> {
    let params = ctx.params;
    check_component(params, component)?;
    let members = ctx.coalition.members();
    let honest_servers = params.servers() - members.len();
    if !data_offset.is_zero() && honest_servers > params.privacy_threshold() {
        return Err(Error::AdversaryInfeasible {
            name,
            what: format!(
                "a data-channel shift needs at most {} honest servers to evade the \
                 consistency check, but {honest_servers} are honest",
                params.privacy_threshold()
            ),
        });
    }
    let basis = vanishing_basis(params, members)?;
    let mut substituted = BTreeMap::new();
    for &j in members {
        let query = ctx.queries.get(&j).ok_or_else(|| {
            Error::Usage(format!("coalition member {j} has no query in the context"))
        })?;
        let honest = answer(ctx.database, query)?;
        let mut data = honest.data().to_vec();
        let mut tag = honest.tag().to_vec();
        data[component] = data[component] + data_offset * basis[&j];
        tag[component] = tag[component] + tag_offset * basis[&j];
        substituted.insert(j, Answer::new(data, tag)?);
    }
    Ok(substituted)
}

fn check_component(params: SchemeParams, component: usize) -> Result<()> {
    if component >= params.block_width() {
        return Err(Error::ShapeMismatch(format!(
            "component {component} outside block width {}",
            params.block_width()
        )));
    }
    Ok(())
}

/// Corrupts the first coalition member's answer by adding 1 to one channel
/// of one component — the bluntest possible tamper.
fn bump_first_member(
    ctx: &AttackContext<'_>,
    component: usize,
    bump_tag: bool,
) -> Result<BTreeMap<usize, Answer>> {
    check_component(ctx.params, component)?;
    let Some(&j) = ctx.coalition.members().iter().next() else {
        return Ok(BTreeMap::new());
    };
    let query = ctx
        .queries
        .get(&j)
        .ok_or_else(|| Error::Usage(format!("coalition member {j} has no query in the context")))?;
    let honest = answer(ctx.database, query)?;
    let one = ctx.params.field().one();
    let mut data = honest.data().to_vec();
    let mut tag = honest.tag().to_vec();
    if bump_tag {
        tag[component] = tag[component] + one;
    } else {
        data[component] = data[component] + one;
    }
    Ok(BTreeMap::from([(j, Answer::new(data, tag)?)]))
}

/// Follows the protocol exactly: substitutes nothing, outputs β = b.
#[derive(Debug, Default)]
pub struct HonestAdversary;

impl Adversary for HonestAdversary {
    fn name(&self) -> &'static str {
        "honest"
    }

    fn substitute(&mut self, _ctx: &AttackContext<'_>) -> Result<BTreeMap<usize, Answer>> {
        Ok(BTreeMap::new())
    }
}

/// The optimal integrity attacker: forges a +1 data shift on one component
/// and a tag shift of r̂·1 for a uniformly guessed key r̂ ∈ Z_p \ {0}.
///
/// The client accepts the wrong value iff r̂ = r, so the winning rate is
/// exactly 1/(p−1) — the integrity bound at w = 1 is tight. Requires at
/// most t honest servers (see [`AttackContext`] notes on the consistency
/// check).
#[derive(Debug)]
pub struct TagGuessAdversary {
    component: usize,
    trial: Option<TrialRandomness>,
}

impl TagGuessAdversary {
    /// Attacks the given block component (0-based).
    pub fn new(component: usize) -> Self {
        Self {
            component,
            trial: None,
        }
    }
}

impl Adversary for TagGuessAdversary {
    fn name(&self) -> &'static str {
        "tag_guess"
    }

    fn randomness_cardinality(&self, params: SchemeParams) -> u128 {
        (params.field().modulus() - 1) as u128
    }

    fn begin_trial(&mut self, randomness: TrialRandomness) {
        self.trial = Some(randomness);
    }

    fn substitute(&mut self, ctx: &AttackContext<'_>) -> Result<BTreeMap<usize, Answer>> {
        let field = ctx.params.field();
        let guess = match self.trial {
            None => {
                return Err(Error::Usage(
                    "tag_guess: begin_trial must run before substitute".into(),
                ))
            }
            Some(TrialRandomness::Seeded(seed)) => field.sample_nonzero(&mut seeded_rng(seed)),
            Some(TrialRandomness::Config(config)) => {
                let nonzero = (field.modulus() - 1) as u128;
                field.element((config % nonzero) as u64 + 1)
            }
        };
        forge_substitution(ctx, self.name(), self.component, field.one(), guess)
    }
}

/// The tag-guess recipe with the guess replaced by the real key, leaked out
/// of band.
///
/// No admissible adversary gets the key — its sharing degree makes it
/// invisible to any ℓ−1 servers — so this strategy exists purely to show the
/// analysis is tight: with the key, the wrong value is accepted every time.
#[derive(Debug)]
pub struct OracleCheaterAdversary {
    component: usize,
}

impl OracleCheaterAdversary {
    /// Attacks the given block component (0-based).
    pub fn new(component: usize) -> Self {
        Self { component }
    }
}

impl Adversary for OracleCheaterAdversary {
    fn name(&self) -> &'static str {
        "oracle_cheater"
    }

    fn wants_leaked_tag_key(&self) -> bool {
        true
    }

    fn substitute(&mut self, ctx: &AttackContext<'_>) -> Result<BTreeMap<usize, Answer>> {
        let key = ctx.leaked_tag_key.ok_or_else(|| {
            Error::Usage("oracle_cheater needs the leaked tag key in its context".into())
        })?;
        forge_substitution(
            ctx,
            self.name(),
            self.component,
            ctx.params.field().one(),
            key,
        )
    }
}

/// Unconditionally adds 1 to one data-channel component of the first
/// coalition member's answer.
#[derive(Debug, Default)]
pub struct FlipDataAdversary {
    component: usize,
}

impl FlipDataAdversary {
    /// Attacks the given block component (0-based).
    pub fn new(component: usize) -> Self {
        Self { component }
    }
}

impl Adversary for FlipDataAdversary {
    fn name(&self) -> &'static str {
        "flip_data"
    }

    fn substitute(&mut self, ctx: &AttackContext<'_>) -> Result<BTreeMap<usize, Answer>> {
        bump_first_member(ctx, self.component, false)
    }
}

/// Unconditionally adds 1 to one tag-channel component of the first
/// coalition member's answer.
#[derive(Debug, Default)]
pub struct FlipTagAdversary {
    component: usize,
}

impl FlipTagAdversary {
    /// Attacks the given block component (0-based).
    pub fn new(component: usize) -> Self {
        Self { component }
    }
}

impl Adversary for FlipTagAdversary {
    fn name(&self) -> &'static str {
        "flip_tag"
    }

    fn substitute(&mut self, ctx: &AttackContext<'_>) -> Result<BTreeMap<usize, Answer>> {
        bump_first_member(ctx, self.component, true)
    }
}

/// The selective-failure probe: corrupts (tag bump, guaranteed rejection)
/// if and only if the first coalition member's first data share is zero.
///
/// This is the canonical attack the privacy definition guards against — the
/// tamper decision depends on query content, so the accept/reject bit could
/// leak something about α if the queries did. Here they do not: each share
/// is marginally uniform whatever α is, so β's distribution is
/// α-independent, which is exactly what the experiments measure.
#[derive(Debug, Default)]
pub struct ProbeAdversary {
    component: usize,
}

impl ProbeAdversary {
    /// Corrupts the given block component (0-based) when triggered.
    pub fn new(component: usize) -> Self {
        Self { component }
    }
}

impl Adversary for ProbeAdversary {
    fn name(&self) -> &'static str {
        "probe"
    }

    fn substitute(&mut self, ctx: &AttackContext<'_>) -> Result<BTreeMap<usize, Answer>> {
        let Some(&j) = ctx.coalition.members().iter().next() else {
            return Ok(BTreeMap::new());
        };
        let query = ctx.queries.get(&j).ok_or_else(|| {
            Error::Usage(format!("coalition member {j} has no query in the context"))
        })?;
        if query.data_shares()[0].is_zero() {
            bump_first_member(ctx, self.component, true)
        } else {
            Ok(BTreeMap::new())
        }
    }
}

/// Names accepted by [`adversary_by_name`], in CLI display order.
pub const BUILTIN_ADVERSARIES: &[&str] = &[
    "honest",
    "tag_guess",
    "oracle_cheater",
    "flip_data",
    "flip_tag",
    "probe",
];

/// Instantiates a built-in adversary attacking block component `component`.
pub fn adversary_by_name(name: &str, component: usize) -> Result<Box<dyn Adversary>> {
    match name {
        "honest" => Ok(Box::new(HonestAdversary)),
        "tag_guess" => Ok(Box::new(TagGuessAdversary::new(component))),
        "oracle_cheater" => Ok(Box::new(OracleCheaterAdversary::new(component))),
        "flip_data" => Ok(Box::new(FlipDataAdversary::new(component))),
        "flip_tag" => Ok(Box::new(FlipTagAdversary::new(component))),
        "probe" => Ok(Box::new(ProbeAdversary::new(component))),
        other => Err(Error::Usage(format!(
            "unknown adversary '{other}', expected one of {}",
            BUILTIN_ADVERSARIES.join("|")
        ))),
    }
}
