//! The runnable security experiments: correctness, the integrity game, the
//! real/ideal selective-failure experiments, and the hybrid chain that
//! connects them.
//!
//! Every experiment runs in one of two modes. **Sampled** mode is Monte
//! Carlo: a master seed expands into per-trial, per-role seeds (client,
//! adversary, simulator), so any trial can be replayed bit-for-bit — which
//! is what lets the hybrid runner compare consecutive hybrids *per trial*
//! rather than only in aggregate. **Exhaustive** mode enumerates the entire
//! randomness space (client coefficient choices × adversary configurations)
//! and reports exact rational frequencies; it refuses spaces above
//! [`EXHAUSTIVE_CONFIG_CAP`](crate::games::EXHAUSTIVE_CONFIG_CAP) instead of
//! silently sampling.
//!
//! The hybrid chain realizes the privacy argument in four steps:
//!
//! * **H0** — the real experiment: the acceptance bit is whether verified
//!   reconstruction returned a value.
//! * **H1** — real queries, but the acceptance bit is replaced by exact
//!   comparison of the coalition's answers against honest ones. H0 and H1
//!   can only disagree when tampered answers get *accepted*, an event with
//!   probability at most the integrity error w/(p−1).
//! * **H2** — as H1, but the coalition's queries come from the simulator.
//!   Because any proper coalition's real view is exactly uniform, H1 and H2
//!   have identical output distributions (exactly, not just negligibly).
//! * **H3** — the ideal experiment proper, the code path
//!   [`run_ideal_experiment`] uses. H2 and H3 are the same random process
//!   and must agree bit-for-bit under shared seeds.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::games::adversary::{Adversary, AttackContext, Coalition, TrialRandomness};
use crate::games::report::{ExperimentReport, Frequency, ReportMode};
use crate::games::EXHAUSTIVE_CONFIG_CAP;
use crate::rng::{mix_seed, seeded_rng};
use crate::scheme::{
    answer, generate_queries, generate_queries_with_randomness, reconstruct, simulate_queries,
    simulate_queries_from_config, simulator_config_count, Answer, Aux, Database, Query,
    QueryRandomness, RetrievalResult, SchemeParams,
};

/// Trial schedule for one experiment run.
#[derive(Debug, Clone, Copy)]
pub enum TrialMode {
    /// Monte Carlo: `trials` trials derived deterministically from `seed`.
    Sampled { trials: u64, seed: u64 },
    /// Full enumeration of every randomness configuration.
    Exhaustive,
}

// Role tags for per-trial seed derivation. Distinct tags keep the client's,
// the adversary's, and the simulator's streams independent even within one
// trial.
const CLIENT_STREAM: u64 = 1;
const ADVERSARY_STREAM: u64 = 2;
const SIMULATOR_STREAM: u64 = 3;

// Branch tags for experiments that run several sub-experiments off one seed.
const BRANCH_REAL_A: u64 = 0xa1;
const BRANCH_REAL_B: u64 = 0xa2;
const BRANCH_IDEAL: u64 = 0xa3;

/// Correctness: honest servers, honest client, every retrieval must return
/// exactly the addressed block.
///
/// Sampled mode draws the index uniformly per trial; exhaustive mode walks
/// every (index, client randomness) pair.
pub fn run_correctness(
    params: SchemeParams,
    database: &Database,
    mode: TrialMode,
) -> Result<ExperimentReport> {
    database.check_shape(params)?;
    let n = params.database_len();
    let mut failures: u128 = 0;

    let (total, seed, report_mode) = match mode {
        TrialMode::Sampled { trials, seed } => {
            check_trials(trials)?;
            for trial in 0..trials {
                let mut rng = seeded_rng(mix_seed(&[seed, trial, CLIENT_STREAM]));
                let alpha = rng.gen_range(1..=n);
                let (queries, aux) = generate_queries(params, alpha, &mut rng)?;
                let answers = honest_answers(database, &queries)?;
                if reconstruct(&answers, aux)?.value() != Some(database.block(alpha)?) {
                    failures += 1;
                }
            }
            (trials as u128, seed, ReportMode::Sampled)
        }
        TrialMode::Exhaustive => {
            let per_index = query_config_count(params)?;
            let total = checked_total(&[per_index, n as u128])?;
            for alpha in 1..=n {
                for config in 0..per_index {
                    let randomness = QueryRandomness::from_config(params, config);
                    let (queries, aux) =
                        generate_queries_with_randomness(params, alpha, &randomness)?;
                    let answers = honest_answers(database, &queries)?;
                    if reconstruct(&answers, aux)?.value() != Some(database.block(alpha)?) {
                        failures += 1;
                    }
                }
            }
            (total, 0, ReportMode::Exhaustive)
        }
    };

    let mut report = ExperimentReport::new("correctness", report_mode, total, seed);
    push_params(&mut report, params);
    report.push_rate("failure_rate", Frequency::new(failures, total));
    report.push_float("analytic_bound", 0.0);
    Ok(report)
}

/// The integrity game: the adversary corrupts a coalition's answers and wins
/// a trial iff the client outputs a *wrong value* — rejecting (⊥) and
/// returning the true block both count against the adversary.
///
/// This is the one experiment where an adversary asking for the leaked tag
/// key receives it; see
/// [`OracleCheaterAdversary`](crate::games::OracleCheaterAdversary).
pub fn run_integrity_game(
    params: SchemeParams,
    database: &Database,
    alpha: usize,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    mode: TrialMode,
) -> Result<ExperimentReport> {
    database.check_shape(params)?;
    let expected = database.block(alpha)?.to_vec();
    let leak = adversary.wants_leaked_tag_key();
    let mut violations: u128 = 0;
    let mut accepted: u128 = 0;

    let mut tally = |result: &RetrievalResult| {
        if let Some(block) = result.value() {
            accepted += 1;
            if block != expected.as_slice() {
                violations += 1;
            }
        }
    };

    let (total, seed, report_mode) = match mode {
        TrialMode::Sampled { trials, seed } => {
            check_trials(trials)?;
            for trial in 0..trials {
                let mut rng = seeded_rng(mix_seed(&[seed, trial, CLIENT_STREAM]));
                let (queries, aux) = generate_queries(params, alpha, &mut rng)?;
                adversary.begin_trial(TrialRandomness::Seeded(mix_seed(&[
                    seed,
                    trial,
                    ADVERSARY_STREAM,
                ])));
                let (result, _) =
                    attacked_trial(params, database, adversary, coalition, &queries, aux, leak)?;
                tally(&result);
            }
            (trials as u128, seed, ReportMode::Sampled)
        }
        TrialMode::Exhaustive => {
            let que_count = query_config_count(params)?;
            let adv_count = adversary.randomness_cardinality(params);
            let total = checked_total(&[que_count, adv_count])?;
            for qc in 0..que_count {
                let randomness = QueryRandomness::from_config(params, qc);
                let (queries, aux) = generate_queries_with_randomness(params, alpha, &randomness)?;
                for ac in 0..adv_count {
                    adversary.begin_trial(TrialRandomness::Config(ac));
                    let (result, _) = attacked_trial(
                        params, database, adversary, coalition, &queries, aux, leak,
                    )?;
                    tally(&result);
                }
            }
            (total, 0, ReportMode::Exhaustive)
        }
    };

    let mut report = ExperimentReport::new("integrity", report_mode, total, seed);
    push_params(&mut report, params);
    report.push_text("adversary", adversary.name());
    report.push_int("alpha", alpha as u128);
    report.push_rate("violation_rate", Frequency::new(violations, total));
    report.push_rate("accept_rate", Frequency::new(accepted, total));
    push_integrity_bound(&mut report, params, report_mode, total);
    Ok(report)
}

/// Exhaustive sweep over every *fixed additive substitution* a single
/// corrupted server can apply: all (data offset, tag offset) pairs per
/// component, each evaluated against the complete client randomness space.
///
/// Offsets are the canonical form of a fixed cheating strategy here: the
/// reconstruction shifts they induce are linear in them, so any fixed
/// substitution function's acceptance region is captured by some offset
/// pair. The report carries the best strategy found and its exact winning
/// rate, which the integrity bound says can never exceed w/(p−1).
pub fn run_integrity_offset_sweep(
    params: SchemeParams,
    database: &Database,
    alpha: usize,
    member: usize,
) -> Result<ExperimentReport> {
    database.check_shape(params)?;
    if member < 1 || member > params.servers() {
        return Err(Error::InvalidCoalition(format!(
            "server index {member} outside 1..={}",
            params.servers()
        )));
    }
    let expected = database.block(alpha)?.to_vec();
    let p = params.field().modulus() as u128;
    let w = params.block_width();
    let offset_count = p
        .checked_pow(u32::try_from(2 * w).map_err(|_| Error::ExhaustiveSpaceOverflow)?)
        .ok_or(Error::ExhaustiveSpaceOverflow)?;
    let que_count = query_config_count(params)?;
    let total = checked_total(&[offset_count, que_count])?;

    let field = params.field();
    let mut best_wins: u128 = 0;
    let mut best_offsets: (Vec<u64>, Vec<u64>) = (vec![0; w], vec![0; w]);
    for oc in 0..offset_count {
        // Decode w data offsets then w tag offsets, base p.
        let mut rest = oc;
        let mut digit = || {
            let d = (rest % p) as u64;
            rest /= p;
            field.element(d)
        };
        let data_offsets: Vec<_> = (0..w).map(|_| digit()).collect();
        let tag_offsets: Vec<_> = (0..w).map(|_| digit()).collect();

        let mut wins: u128 = 0;
        for qc in 0..que_count {
            let randomness = QueryRandomness::from_config(params, qc);
            let (queries, aux) = generate_queries_with_randomness(params, alpha, &randomness)?;
            let mut answers = honest_answers(database, &queries)?;
            let target = &answers[member - 1];
            let data = target
                .data()
                .iter()
                .zip(&data_offsets)
                .map(|(&a, &d)| a + d)
                .collect();
            let tag = target
                .tag()
                .iter()
                .zip(&tag_offsets)
                .map(|(&b, &g)| b + g)
                .collect();
            answers[member - 1] = Answer::new(data, tag)?;
            if let Some(block) = reconstruct(&answers, aux)?.value() {
                if block != expected.as_slice() {
                    wins += 1;
                }
            }
        }
        if wins > best_wins {
            best_wins = wins;
            best_offsets = (
                data_offsets.iter().map(|e| e.value()).collect(),
                tag_offsets.iter().map(|e| e.value()).collect(),
            );
        }
    }

    let mut report =
        ExperimentReport::new("integrity_offset_sweep", ReportMode::Exhaustive, total, 0);
    push_params(&mut report, params);
    report.push_int("alpha", alpha as u128);
    report.push_int("member", member as u128);
    report.push_int("strategies", offset_count);
    report.push_rate("best_violation_rate", Frequency::new(best_wins, que_count));
    report.push_text("best_data_offset", join_values(&best_offsets.0));
    report.push_text("best_tag_offset", join_values(&best_offsets.1));
    push_integrity_bound(&mut report, params, ReportMode::Exhaustive, total);
    Ok(report)
}

/// The real selective-failure experiment: honest query generation for
/// `alpha`, adversarial substitution on the coalition, and the acceptance
/// bit b = "reconstruction did not reject", which stage two of the adversary
/// turns into its output bit β.
///
/// The tag key is never leaked here — privacy experiments model exactly the
/// view the protocol gives a coalition.
pub fn run_real_experiment(
    params: SchemeParams,
    database: &Database,
    alpha: usize,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    mode: TrialMode,
) -> Result<ExperimentReport> {
    database.check_shape(params)?;
    check_privacy_size(params, coalition)?;
    let mut beta_count: u128 = 0;
    let mut accept_count: u128 = 0;

    let (total, seed, report_mode) = match mode {
        TrialMode::Sampled { trials, seed } => {
            check_trials(trials)?;
            for trial in 0..trials {
                let mut rng = seeded_rng(mix_seed(&[seed, trial, CLIENT_STREAM]));
                let (queries, aux) = generate_queries(params, alpha, &mut rng)?;
                adversary.begin_trial(TrialRandomness::Seeded(mix_seed(&[
                    seed,
                    trial,
                    ADVERSARY_STREAM,
                ])));
                let (result, _) =
                    attacked_trial(params, database, adversary, coalition, &queries, aux, false)?;
                let b = !result.is_bot();
                accept_count += u128::from(b);
                beta_count += u128::from(adversary.output(b));
            }
            (trials as u128, seed, ReportMode::Sampled)
        }
        TrialMode::Exhaustive => {
            let que_count = query_config_count(params)?;
            let adv_count = adversary.randomness_cardinality(params);
            let total = checked_total(&[que_count, adv_count])?;
            for qc in 0..que_count {
                let randomness = QueryRandomness::from_config(params, qc);
                let (queries, aux) = generate_queries_with_randomness(params, alpha, &randomness)?;
                for ac in 0..adv_count {
                    adversary.begin_trial(TrialRandomness::Config(ac));
                    let (result, _) = attacked_trial(
                        params, database, adversary, coalition, &queries, aux, false,
                    )?;
                    let b = !result.is_bot();
                    accept_count += u128::from(b);
                    beta_count += u128::from(adversary.output(b));
                }
            }
            (total, 0, ReportMode::Exhaustive)
        }
    };

    let mut report = ExperimentReport::new("real", report_mode, total, seed);
    push_params(&mut report, params);
    report.push_text("adversary", adversary.name());
    report.push_int("alpha", alpha as u128);
    report.push_rate("beta_rate", Frequency::new(beta_count, total));
    report.push_rate("accept_rate", Frequency::new(accept_count, total));
    Ok(report)
}

/// The ideal selective-failure experiment: the coalition's queries come from
/// the simulator, the acceptance bit is computed by exact comparison against
/// reference answers, and — structurally — no retrieval index exists
/// anywhere in the experiment.
pub fn run_ideal_experiment(
    params: SchemeParams,
    database: &Database,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    mode: TrialMode,
) -> Result<ExperimentReport> {
    database.check_shape(params)?;
    check_privacy_size(params, coalition)?;
    let mut beta_count: u128 = 0;
    let mut accept_count: u128 = 0;

    let (total, seed, report_mode) = match mode {
        TrialMode::Sampled { trials, seed } => {
            check_trials(trials)?;
            for trial in 0..trials {
                let mut rng = seeded_rng(mix_seed(&[seed, trial, SIMULATOR_STREAM]));
                let queries = simulate_queries(params, coalition.members(), &mut rng)?;
                adversary.begin_trial(TrialRandomness::Seeded(mix_seed(&[
                    seed,
                    trial,
                    ADVERSARY_STREAM,
                ])));
                let (b, beta) = ideal_trial(params, database, adversary, coalition, &queries)?;
                accept_count += u128::from(b);
                beta_count += u128::from(beta);
            }
            (trials as u128, seed, ReportMode::Sampled)
        }
        TrialMode::Exhaustive => {
            let sim_count = sim_config_count(params, coalition)?;
            let adv_count = adversary.randomness_cardinality(params);
            let total = checked_total(&[sim_count, adv_count])?;
            for sc in 0..sim_count {
                let queries = simulate_queries_from_config(params, coalition.members(), sc)?;
                for ac in 0..adv_count {
                    adversary.begin_trial(TrialRandomness::Config(ac));
                    let (b, beta) = ideal_trial(params, database, adversary, coalition, &queries)?;
                    accept_count += u128::from(b);
                    beta_count += u128::from(beta);
                }
            }
            (total, 0, ReportMode::Exhaustive)
        }
    };

    let mut report = ExperimentReport::new("ideal", report_mode, total, seed);
    push_params(&mut report, params);
    report.push_text("adversary", adversary.name());
    report.push_rate("beta_rate", Frequency::new(beta_count, total));
    report.push_rate("accept_rate", Frequency::new(accept_count, total));
    Ok(report)
}

/// The four-hybrid chain under one coupled seed schedule.
///
/// Per trial, all four hybrids replay the same client, adversary, and
/// simulator randomness, so the report's `disagree_*` metrics are per-trial
/// couplings: `disagree_h0_h1` counts trials where replacing the real
/// acceptance bit by exact comparison changed the adversary's output (the
/// event bounded by the integrity error), and `disagree_h2_h3` counts
/// trials where the inline simulated hybrid and the ideal-experiment code
/// path diverge (it must stay zero — same random process).
pub fn run_hybrids(
    params: SchemeParams,
    database: &Database,
    alpha: usize,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    mode: TrialMode,
) -> Result<ExperimentReport> {
    database.check_shape(params)?;
    check_privacy_size(params, coalition)?;

    let mut w = [0u128; 4];
    let mut disagree01: u128 = 0;
    let mut disagree23: u128 = 0;

    let (total01, total23, seed, report_mode) = match mode {
        TrialMode::Sampled { trials, seed } => {
            check_trials(trials)?;
            for trial in 0..trials {
                let client_seed = mix_seed(&[seed, trial, CLIENT_STREAM]);
                let adv_rand = TrialRandomness::Seeded(mix_seed(&[seed, trial, ADVERSARY_STREAM]));
                let sim_seed = mix_seed(&[seed, trial, SIMULATOR_STREAM]);

                let mut crng = seeded_rng(client_seed);
                let (queries, aux) = generate_queries(params, alpha, &mut crng)?;
                let (beta0, beta1) = hybrid_real_pair(
                    params, database, adversary, coalition, &queries, aux, adv_rand,
                )?;
                let mut srng = seeded_rng(sim_seed);
                let sim_queries = simulate_queries(params, coalition.members(), &mut srng)?;
                let (beta2, beta3) = hybrid_sim_pair(
                    params,
                    database,
                    adversary,
                    coalition,
                    &sim_queries,
                    adv_rand,
                )?;

                w[0] += u128::from(beta0);
                w[1] += u128::from(beta1);
                w[2] += u128::from(beta2);
                w[3] += u128::from(beta3);
                disagree01 += u128::from(beta0 != beta1);
                disagree23 += u128::from(beta2 != beta3);
            }
            (trials as u128, trials as u128, seed, ReportMode::Sampled)
        }
        TrialMode::Exhaustive => {
            let que_count = query_config_count(params)?;
            let sim_count = sim_config_count(params, coalition)?;
            let adv_count = adversary.randomness_cardinality(params);
            let total01 = checked_total(&[que_count, adv_count])?;
            let total23 = checked_total(&[sim_count, adv_count])?;

            for qc in 0..que_count {
                let randomness = QueryRandomness::from_config(params, qc);
                let (queries, aux) = generate_queries_with_randomness(params, alpha, &randomness)?;
                for ac in 0..adv_count {
                    let adv_rand = TrialRandomness::Config(ac);
                    let (beta0, beta1) = hybrid_real_pair(
                        params, database, adversary, coalition, &queries, aux, adv_rand,
                    )?;
                    w[0] += u128::from(beta0);
                    w[1] += u128::from(beta1);
                    disagree01 += u128::from(beta0 != beta1);
                }
            }
            for sc in 0..sim_count {
                let sim_queries = simulate_queries_from_config(params, coalition.members(), sc)?;
                for ac in 0..adv_count {
                    let adv_rand = TrialRandomness::Config(ac);
                    let (beta2, beta3) = hybrid_sim_pair(
                        params,
                        database,
                        adversary,
                        coalition,
                        &sim_queries,
                        adv_rand,
                    )?;
                    w[2] += u128::from(beta2);
                    w[3] += u128::from(beta3);
                    disagree23 += u128::from(beta2 != beta3);
                }
            }
            (total01, total23, 0, ReportMode::Exhaustive)
        }
    };

    let rates = [
        Frequency::new(w[0], total01),
        Frequency::new(w[1], total01),
        Frequency::new(w[2], total23),
        Frequency::new(w[3], total23),
    ];
    let mut report = ExperimentReport::new("hybrids", report_mode, total01, seed);
    push_params(&mut report, params);
    report.push_text("adversary", adversary.name());
    report.push_int("alpha", alpha as u128);
    for (i, rate) in rates.iter().enumerate() {
        report.push_rate(&format!("w{i}"), *rate);
    }
    report.push_rate("disagree_h0_h1", Frequency::new(disagree01, total01));
    report.push_rate("disagree_h2_h3", Frequency::new(disagree23, total23));
    report.push_rate("gap_h0_h1", rates[0].abs_diff(rates[1]));
    report.push_rate("gap_h1_h2", rates[1].abs_diff(rates[2]));
    push_integrity_bound(&mut report, params, report_mode, total01);
    Ok(report)
}

/// The full selective-failure comparison: the same adversary's β-rate is
/// measured in the real experiment at two retrieval indices and in the
/// ideal experiment (which has no index), and the pairwise gaps are
/// reported against the distance bound w/(p−1).
pub fn run_selective_failure_experiment(
    params: SchemeParams,
    database: &Database,
    alphas: (usize, usize),
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    mode: TrialMode,
) -> Result<ExperimentReport> {
    let branch = |tag: u64| match mode {
        TrialMode::Sampled { trials, seed } => TrialMode::Sampled {
            trials,
            seed: mix_seed(&[seed, tag]),
        },
        TrialMode::Exhaustive => TrialMode::Exhaustive,
    };
    let real_a = run_real_experiment(
        params,
        database,
        alphas.0,
        adversary,
        coalition,
        branch(BRANCH_REAL_A),
    )?;
    let real_b = run_real_experiment(
        params,
        database,
        alphas.1,
        adversary,
        coalition,
        branch(BRANCH_REAL_B),
    )?;
    let ideal = run_ideal_experiment(params, database, adversary, coalition, branch(BRANCH_IDEAL))?;

    let beta_a = real_a
        .rate("beta_rate")
        .expect("real report carries beta_rate");
    let beta_b = real_b
        .rate("beta_rate")
        .expect("real report carries beta_rate");
    let beta_ideal = ideal
        .rate("beta_rate")
        .expect("ideal report carries beta_rate");

    let (mode_label, trials, seed) = match mode {
        TrialMode::Sampled { trials, seed } => (ReportMode::Sampled, trials as u128, seed),
        TrialMode::Exhaustive => (ReportMode::Exhaustive, real_a.trials(), 0),
    };
    let mut report = ExperimentReport::new("selective_failure", mode_label, trials, seed);
    push_params(&mut report, params);
    report.push_text("adversary", adversary.name());
    report.push_int("alpha_a", alphas.0 as u128);
    report.push_int("alpha_b", alphas.1 as u128);
    report.push_rate("beta_rate_real_a", beta_a);
    report.push_rate("beta_rate_real_b", beta_b);
    report.push_rate("beta_rate_ideal", beta_ideal);
    report.push_rate("gap_real_real", beta_a.abs_diff(beta_b));
    report.push_rate("gap_real_ideal_a", beta_a.abs_diff(beta_ideal));
    report.push_rate("gap_real_ideal_b", beta_b.abs_diff(beta_ideal));
    let (num, den) = params.integrity_error_bound();
    report.push_rate("analytic_bound", Frequency::new(num as u128, den as u128));
    if let TrialMode::Sampled { trials, .. } = mode {
        // 4σ half-width for a difference of two independent binomial rates,
        // using the measured rates.
        let n = trials as f64;
        let var = |f: Frequency| f.as_f64() * (1.0 - f.as_f64()) / n;
        report.push_float(
            "ci_halfwidth",
            4.0 * (var(beta_a) + var(beta_b))
                .sqrt()
                .max((var(beta_a) + var(beta_ideal)).sqrt()),
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Shared trial machinery
// ---------------------------------------------------------------------------

/// One attacked retrieval: the adversary (whose `begin_trial` has already
/// run) substitutes coalition answers, honest servers answer faithfully, and
/// the client reconstructs. Returns the retrieval result together with the
/// exact-match bit "every substituted answer equals the honest one", which
/// is the acceptance bit the later hybrids use.
fn attacked_trial(
    params: SchemeParams,
    database: &Database,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    queries: &[Query],
    aux: Aux,
    leak_tag_key: bool,
) -> Result<(RetrievalResult, bool)> {
    let view: BTreeMap<usize, Query> = coalition
        .members()
        .iter()
        .map(|&j| (j, queries[j - 1].clone()))
        .collect();
    let ctx = AttackContext {
        params,
        database,
        coalition,
        queries: &view,
        leaked_tag_key: leak_tag_key.then(|| aux.tag_key()),
    };
    let substituted = adversary.substitute(&ctx)?;
    let honest = honest_answers(database, queries)?;
    let exact_match = substituted.iter().all(|(j, sub)| sub == &honest[j - 1]);
    let merged = merge_substituted(params, &honest, substituted, coalition)?;
    Ok((reconstruct(&merged, aux)?, exact_match))
}

/// One ideal-experiment trial: reference answers for the simulated coalition
/// queries, adversarial substitution, acceptance iff nothing changed, and
/// the adversary's output bit. This is the exact code path hybrid H3 runs.
fn ideal_trial(
    params: SchemeParams,
    database: &Database,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    queries: &BTreeMap<usize, Query>,
) -> Result<(bool, bool)> {
    let mut references = BTreeMap::new();
    for (&j, query) in queries {
        references.insert(j, answer(database, query)?);
    }
    let ctx = AttackContext {
        params,
        database,
        coalition,
        queries,
        leaked_tag_key: None,
    };
    let substituted = adversary.substitute(&ctx)?;
    for (&j, sub) in &substituted {
        check_substitution(params, coalition, j, sub)?;
    }
    let b = substituted.iter().all(|(j, sub)| sub == &references[j]);
    let beta = adversary.output(b);
    Ok((b, beta))
}

/// Hybrids H0 and H1 on one shared transcript: H0's bit is real acceptance,
/// H1's bit is exact answer comparison; the adversary's randomness is
/// replayed so the two differ only in how the bit is computed.
fn hybrid_real_pair(
    params: SchemeParams,
    database: &Database,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    queries: &[Query],
    aux: Aux,
    adv_rand: TrialRandomness,
) -> Result<(bool, bool)> {
    adversary.begin_trial(adv_rand);
    let (result, _) = attacked_trial(params, database, adversary, coalition, queries, aux, false)?;
    let beta0 = adversary.output(!result.is_bot());

    adversary.begin_trial(adv_rand);
    let (_, exact_match) =
        attacked_trial(params, database, adversary, coalition, queries, aux, false)?;
    let beta1 = adversary.output(exact_match);
    Ok((beta0, beta1))
}

/// Hybrids H2 and H3 on one shared simulated transcript: H2 computes the
/// exact-match bit inline, H3 delegates to the ideal-experiment code path;
/// they are the same random process and must agree bit-for-bit.
fn hybrid_sim_pair(
    params: SchemeParams,
    database: &Database,
    adversary: &mut dyn Adversary,
    coalition: &Coalition,
    queries: &BTreeMap<usize, Query>,
    adv_rand: TrialRandomness,
) -> Result<(bool, bool)> {
    adversary.begin_trial(adv_rand);
    let ctx = AttackContext {
        params,
        database,
        coalition,
        queries,
        leaked_tag_key: None,
    };
    let substituted = adversary.substitute(&ctx)?;
    let mut b2 = true;
    for (&j, sub) in &substituted {
        check_substitution(params, coalition, j, sub)?;
        let query = queries
            .get(&j)
            .ok_or_else(|| Error::Usage(format!("coalition member {j} has no simulated query")))?;
        if sub != &answer(database, query)? {
            b2 = false;
        }
    }
    let beta2 = adversary.output(b2);

    adversary.begin_trial(adv_rand);
    let (_, beta3) = ideal_trial(params, database, adversary, coalition, queries)?;
    Ok((beta2, beta3))
}

fn honest_answers(database: &Database, queries: &[Query]) -> Result<Vec<Answer>> {
    queries.iter().map(|q| answer(database, q)).collect()
}

fn merge_substituted(
    params: SchemeParams,
    honest: &[Answer],
    substituted: BTreeMap<usize, Answer>,
    coalition: &Coalition,
) -> Result<Vec<Answer>> {
    let mut merged = honest.to_vec();
    for (j, sub) in substituted {
        check_substitution(params, coalition, j, &sub)?;
        merged[j - 1] = sub;
    }
    Ok(merged)
}

fn check_substitution(
    params: SchemeParams,
    coalition: &Coalition,
    server: usize,
    substituted: &Answer,
) -> Result<()> {
    if !coalition.contains(server) {
        return Err(Error::SubstitutionOutsideCoalition { server });
    }
    if substituted.data().len() != params.block_width() {
        return Err(Error::ShapeMismatch(format!(
            "substituted answer for server {server} has width {}, expected {}",
            substituted.data().len(),
            params.block_width()
        )));
    }
    Ok(())
}

fn check_privacy_size(params: SchemeParams, coalition: &Coalition) -> Result<()> {
    if coalition.members().len() > params.privacy_threshold() {
        return Err(Error::InvalidCoalition(format!(
            "privacy experiments allow at most t={} members, got {}",
            params.privacy_threshold(),
            coalition.members().len()
        )));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::Usage("trial count must be positive".into()));
    }
    Ok(())
}

fn query_config_count(params: SchemeParams) -> Result<u128> {
    QueryRandomness::config_count(params).ok_or(Error::ExhaustiveSpaceOverflow)
}

fn sim_config_count(params: SchemeParams, coalition: &Coalition) -> Result<u128> {
    simulator_config_count(params, coalition.members().len()).ok_or(Error::ExhaustiveSpaceOverflow)
}

/// Multiplies enumeration-space factors, refusing overflow and anything
/// above the exhaustive cap.
fn checked_total(factors: &[u128]) -> Result<u128> {
    let mut acc: u128 = 1;
    for &f in factors {
        acc = acc.checked_mul(f).ok_or(Error::ExhaustiveSpaceOverflow)?;
    }
    if acc > EXHAUSTIVE_CONFIG_CAP {
        return Err(Error::ExhaustiveSpaceTooLarge {
            needed: acc,
            cap: EXHAUSTIVE_CONFIG_CAP,
        });
    }
    if acc == 0 {
        return Err(Error::Usage("empty enumeration space".into()));
    }
    Ok(acc)
}

fn push_params(report: &mut ExperimentReport, params: SchemeParams) {
    report.push_text(
        "params",
        format!(
            "p={} ell={} t={} n={} w={}",
            params.field().modulus(),
            params.servers(),
            params.privacy_threshold(),
            params.database_len(),
            params.block_width()
        ),
    );
}

fn push_integrity_bound(
    report: &mut ExperimentReport,
    params: SchemeParams,
    mode: ReportMode,
    trials: u128,
) {
    let (num, den) = params.integrity_error_bound();
    report.push_rate("analytic_bound", Frequency::new(num as u128, den as u128));
    if mode == ReportMode::Sampled {
        let p0 = params.integrity_error_bound_f64().min(0.5);
        let ci = 4.0 * (p0 * (1.0 - p0) / trials as f64).sqrt();
        report.push_float("ci_halfwidth", ci);
    }
}

fn join_values(values: &[u64]) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(":")
}
