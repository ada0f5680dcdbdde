//! Release acceptance suite: one test per criterion, each ending in a
//! one-line verdict (visible with `--nocapture`; in normal runs the test
//! name itself is the per-criterion pass/fail line).
//!
//! The criteria pin the toolkit's headline claims end to end:
//!
//! 1.  correctness — honest retrievals never fail, exhaustively at small
//!     parameters and sampled at production-shaped ones;
//! 2.  perfect query privacy — coalition query views are exactly
//!     distribution-identical across retrieval indices and against the
//!     simulator (total variation distance zero, computed as a fraction);
//! 3.  integrity — forging strategies win at exactly the analytic rate
//!     w/(p−1), and a leaked tag key breaks the scheme completely;
//! 4.  the simulation argument — the four-hybrid chain behind the privacy
//!     theorem, with the middle step exact and the ends tied together by
//!     the integrity error;
//! 5.  selective-failure resistance — acceptance of tampered answers
//!     cannot be turned into a retrieval-index oracle;
//! 6.  wire and persistence fidelity — golden bytes for both formats, and
//!     real server processes indistinguishable from in-process execution;
//! 7.  end-to-end attacks — tampering proxies on real sockets are caught
//!     at exactly the predicted rates.
//!
//! Criteria 6 and 7 spawn actual `itapir` subprocesses and talk to them
//! over loopback TCP, so the binary under test is the one that ships.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::time::Duration;

use itapir_core::field::PrimeField;
use itapir_core::games::{
    adversary_by_name, run_correctness, run_hybrids, run_integrity_game,
    run_integrity_offset_sweep, run_selective_failure_experiment, total_variation_distance,
    Coalition, DistanceMode, Frequency, RealQueryView, SimulatedQueryView, TrialMode,
};
use itapir_core::rng::seeded_rng;
use itapir_core::scheme::{answer, generate_queries, reconstruct, Database, SchemeParams};
use itapir_net::{comm_cost, db_read, db_write, ClientSession, CommStats, Frame, QueryPayload};

const CONNECT_TIMEOUT: Duration = Duration::from_secs(10);

fn params(p: u64, servers: usize, t: usize, n: usize, w: usize) -> SchemeParams {
    let field = PrimeField::new(p).expect("prime modulus");
    SchemeParams::with_max_security(servers, t, n, w, field).expect("valid parameters")
}

fn seeded_database(params: SchemeParams, seed: u64) -> Database {
    Database::random(params, &mut seeded_rng(seed))
}

/// 4σ half-width for a binomial rate estimate around probability `p0`.
fn binomial_halfwidth(p0: f64, trials: u64) -> f64 {
    4.0 * (p0 * (1.0 - p0) / trials as f64).sqrt()
}

/// A spawned `itapir` subprocess, killed on drop so failing tests don't
/// leak servers or proxies.
struct ChildGuard(Child);

impl Drop for ChildGuard {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

/// Spawns the CLI binary and waits for its announcement line; `serve` and
/// `proxy` both print the bound address as the third word, which is how
/// tests learn the ephemeral port.
fn spawn_announced(args: &[&str]) -> (ChildGuard, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_itapir"))
        .args(args)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .expect("spawn itapir");
    let stdout = child.stdout.take().expect("captured stdout");
    let mut line = String::new();
    BufReader::new(stdout)
        .read_line(&mut line)
        .expect("read announcement line");
    let address = line
        .split_whitespace()
        .nth(2)
        .unwrap_or_else(|| panic!("unexpected announcement {line:?}"))
        .to_string();
    (ChildGuard(child), address)
}

fn spawn_servers(db_path: &Path, count: usize) -> (Vec<ChildGuard>, Vec<String>) {
    let path = db_path.to_str().expect("utf-8 path");
    let mut guards = Vec::new();
    let mut addresses = Vec::new();
    for _ in 0..count {
        let (guard, address) = spawn_announced(&["serve", "--db", path, "--listen", "127.0.0.1:0"]);
        guards.push(guard);
        addresses.push(address);
    }
    (guards, addresses)
}

#[test]
fn criterion_1_correctness() {
    // Exhaustive: every (index, client randomness) pair at small
    // parameters — ℓ = 3 > t+1 exercises the consistency check on the
    // honest path too.
    let small = params(5, 3, 1, 2, 1);
    let database = seeded_database(small, 0x11);
    let report = run_correctness(small, &database, TrialMode::Exhaustive).expect("exhaustive run");
    // (p−1) tag keys × p^(n·t) data polynomials × p^(n·(ℓ−1)) tag
    // polynomials per index, times n indices.
    let per_index = 4 * 5u128.pow(2) * 5u128.pow(4);
    assert_eq!(report.trials(), 2 * per_index);
    assert_eq!(
        report.rate("failure_rate"),
        Some(Frequency::zero(2 * per_index))
    );

    // Monte Carlo at production-shaped parameters.
    let big = params(257, 4, 2, 64, 8);
    let database = seeded_database(big, 0x12);
    let report = run_correctness(
        big,
        &database,
        TrialMode::Sampled {
            trials: 10_000,
            seed: 0x13,
        },
    )
    .expect("sampled run");
    assert!(report.rate("failure_rate").expect("failure_rate").is_zero());

    println!("criterion 1 (correctness): PASS");
}

#[test]
fn criterion_2_query_privacy_is_perfect() {
    // t = 1: for both singleton coalitions the coalition's joint share
    // view has exactly the same distribution whether the client fetches
    // block 1 or block 2 — and either matches the index-free simulator.
    let ps = params(3, 2, 1, 2, 1);
    for member in 1..=2 {
        let coalition: BTreeSet<usize> = [member].into();
        let real_a = RealQueryView::new(ps, 1, coalition.clone());
        let real_b = RealQueryView::new(ps, 2, coalition.clone());
        let simulated = SimulatedQueryView::new(ps, coalition);

        let report = total_variation_distance(&real_a, &real_b, DistanceMode::Exhaustive)
            .expect("index-pair distance");
        assert!(report.exact);
        assert!(
            report.distance.is_zero(),
            "coalition {{{member}}}: index-pair distance {}",
            report.distance
        );
        for real in [&real_a, &real_b] {
            let report = total_variation_distance(real, &simulated, DistanceMode::Exhaustive)
                .expect("simulator distance");
            assert!(report.exact);
            assert!(
                report.distance.is_zero(),
                "coalition {{{member}}}: simulator distance {}",
                report.distance
            );
        }
    }

    // t = 2 at four servers: a spread-out two-server coalition still sees
    // exactly the simulator's distribution.
    let ps = params(5, 4, 2, 1, 1);
    let coalition: BTreeSet<usize> = [2, 4].into();
    let real = RealQueryView::new(ps, 1, coalition.clone());
    let simulated = SimulatedQueryView::new(ps, coalition);
    let report = total_variation_distance(&real, &simulated, DistanceMode::Exhaustive)
        .expect("simulator distance");
    assert!(report.exact);
    assert!(report.distance.is_zero());

    println!("criterion 2 (perfect query privacy): PASS");
}

#[test]
fn criterion_3_integrity_bound() {
    // Monte Carlo: the tag-guessing forger controlling all but one server
    // wins at the guessing rate 1/(p−1), no more and no less.
    let ps = params(257, 3, 1, 2, 1);
    let database = seeded_database(ps, 0x31);
    let coalition = Coalition::integrity(ps, [2, 3]).expect("coalition");
    let mut forger = adversary_by_name("tag_guess", 0).expect("adversary");
    let trials = 100_000;
    let report = run_integrity_game(
        ps,
        &database,
        1,
        forger.as_mut(),
        &coalition,
        TrialMode::Sampled { trials, seed: 0x32 },
    )
    .expect("integrity game");
    let rate = report
        .rate("violation_rate")
        .expect("violation_rate")
        .as_f64();
    let bound = ps.integrity_error_bound_f64();
    let half = binomial_halfwidth(bound, trials);
    assert!(
        (rate - bound).abs() <= half,
        "violation rate {rate} outside {bound} ± {half}"
    );

    // A leaked tag key defeats integrity outright: the oracle cheater
    // forges an accepted wrong block on every single trial.
    let mut cheater = adversary_by_name("oracle_cheater", 0).expect("adversary");
    let report = run_integrity_game(
        ps,
        &database,
        1,
        cheater.as_mut(),
        &coalition,
        TrialMode::Sampled {
            trials: 2_000,
            seed: 0x33,
        },
    )
    .expect("integrity game");
    assert_eq!(report.rate("violation_rate"), Some(Frequency::new(1, 1)));

    // Exhaustive sweep over every fixed substitution strategy at tiny
    // parameters: the best one wins at exactly w/(p−1) = 1/4.
    let tiny = params(5, 2, 1, 1, 1);
    let database = seeded_database(tiny, 0x34);
    let report = run_integrity_offset_sweep(tiny, &database, 1, 2).expect("offset sweep");
    assert_eq!(
        report.rate("best_violation_rate"),
        Some(Frequency::new(1, 4))
    );

    println!("criterion 3 (integrity bound): PASS");
}

#[test]
fn criterion_4_hybrid_chain() {
    // Monte Carlo at κ = 8: the only step of the chain that can differ per
    // trial — swapping the acceptance bit for the exact-match bit — does
    // so at most at the integrity error, and the simulated pair agrees bit
    // for bit because the ideal experiment replays the same randomness.
    let ps = params(257, 2, 1, 2, 1);
    let database = seeded_database(ps, 0x41);
    let coalition = Coalition::privacy(ps, [2]).expect("coalition");
    let mut forger = adversary_by_name("tag_guess", 0).expect("adversary");
    let trials = 100_000;
    let report = run_hybrids(
        ps,
        &database,
        1,
        forger.as_mut(),
        &coalition,
        TrialMode::Sampled { trials, seed: 0x42 },
    )
    .expect("hybrid chain");
    let disagree = report
        .rate("disagree_h0_h1")
        .expect("disagree_h0_h1")
        .as_f64();
    let bound = ps.integrity_error_bound_f64();
    assert!(
        disagree <= bound + binomial_halfwidth(bound, trials),
        "per-trial H0/H1 disagreement {disagree} above the integrity error {bound}"
    );
    assert_eq!(
        report.rate("disagree_h2_h3"),
        Some(Frequency::zero(trials as u128))
    );
    assert_eq!(report.rate("w2"), report.rate("w3"));
    let w1 = report.rate("w1").expect("w1").as_f64();
    let w2 = report.rate("w2").expect("w2").as_f64();
    let noise = 4.0 * ((w1 * (1.0 - w1) + w2 * (1.0 - w2)) / trials as f64).sqrt();
    assert!(
        (w1 - w2).abs() <= noise,
        "H1/H2 estimates {w1} vs {w2} differ beyond sampling noise {noise}"
    );

    // Exhaustive, forging adversary: the acceptance rate in H0 is exactly
    // the guessing rate, and the middle hybrids agree exactly.
    let tiny = params(5, 2, 1, 1, 1);
    let database = seeded_database(tiny, 0x43);
    let coalition = Coalition::privacy(tiny, [2]).expect("coalition");
    let mut forger = adversary_by_name("tag_guess", 0).expect("adversary");
    let report = run_hybrids(
        tiny,
        &database,
        1,
        forger.as_mut(),
        &coalition,
        TrialMode::Exhaustive,
    )
    .expect("hybrid chain");
    assert_eq!(report.rate("w0"), Some(Frequency::new(1, 4)));
    assert_eq!(report.rate("w1"), report.rate("w2"));
    assert!(report
        .rate("disagree_h2_h3")
        .expect("disagree_h2_h3")
        .is_zero());

    // Exhaustive, probing adversary: all four hybrid estimates are equal
    // as fractions even though the real pair averages over the client's
    // randomness space and the simulated pair over the (much smaller)
    // simulator space — the strongest form of the middle equality.
    let probe_params = params(5, 3, 1, 2, 1);
    let database = seeded_database(probe_params, 0x44);
    let coalition = Coalition::privacy(probe_params, [1]).expect("coalition");
    let mut prober = adversary_by_name("probe", 0).expect("adversary");
    let report = run_hybrids(
        probe_params,
        &database,
        1,
        prober.as_mut(),
        &coalition,
        TrialMode::Exhaustive,
    )
    .expect("hybrid chain");
    let w: Vec<Frequency> = (0..4)
        .map(|i| report.rate(&format!("w{i}")).expect("hybrid rate"))
        .collect();
    assert_eq!(w[0], w[1]);
    assert_eq!(w[1], w[2]);
    assert_eq!(w[2], w[3]);
    assert_ne!(
        w[1].total(),
        w[2].total(),
        "the middle equality should span different randomness spaces"
    );
    assert!(report
        .rate("disagree_h0_h1")
        .expect("disagree_h0_h1")
        .is_zero());
    assert!(report
        .rate("disagree_h2_h3")
        .expect("disagree_h2_h3")
        .is_zero());

    println!("criterion 4 (hybrid chain): PASS");
}

#[test]
fn criterion_5_selective_failure_resistance() {
    // Exhaustive: the probing adversary — which corrupts answers only when
    // its coalition share hits a trigger value — sees exactly the same
    // β-rate whether the client fetches block 1, block 2, or nothing at
    // all (the ideal experiment). The acceptance channel carries zero
    // information about the retrieval index.
    let tiny = params(3, 2, 1, 2, 1);
    let database = seeded_database(tiny, 0x51);
    let coalition = Coalition::privacy(tiny, [1]).expect("coalition");
    let mut prober = adversary_by_name("probe", 0).expect("adversary");
    let report = run_selective_failure_experiment(
        tiny,
        &database,
        (1, 2),
        prober.as_mut(),
        &coalition,
        TrialMode::Exhaustive,
    )
    .expect("selective-failure experiment");
    for key in ["gap_real_real", "gap_real_ideal_a", "gap_real_ideal_b"] {
        let gap = report.rate(key).expect(key);
        assert!(gap.is_zero(), "{key} = {gap}, expected exactly zero");
    }
    assert_eq!(
        report.rate("beta_rate_real_a"),
        report.rate("beta_rate_ideal")
    );

    // Monte Carlo at κ = 8: the measured gaps stay within the analytic
    // bound w/(p−1) plus sampling noise.
    let ps = params(257, 2, 1, 2, 1);
    let database = seeded_database(ps, 0x52);
    let coalition = Coalition::privacy(ps, [2]).expect("coalition");
    let mut prober = adversary_by_name("probe", 0).expect("adversary");
    let report = run_selective_failure_experiment(
        ps,
        &database,
        (1, 2),
        prober.as_mut(),
        &coalition,
        TrialMode::Sampled {
            trials: 100_000,
            seed: 0x53,
        },
    )
    .expect("selective-failure experiment");
    let bound = ps.integrity_error_bound_f64();
    let noise = report.float("ci_halfwidth").expect("ci_halfwidth");
    for key in ["gap_real_real", "gap_real_ideal_a", "gap_real_ideal_b"] {
        let gap = report.rate(key).expect(key).as_f64();
        assert!(
            gap <= bound + noise,
            "{key} = {gap} above bound {bound} + noise {noise}"
        );
    }

    println!("criterion 5 (selective-failure resistance): PASS");
}

#[test]
fn criterion_6_wire_and_persistence_fidelity() {
    let dir = tempfile::tempdir().expect("tempdir");

    // Golden database file: byte-exact layout and a lossless round-trip.
    let field = PrimeField::new(7).expect("prime");
    let database = Database::from_values(field, &[vec![3], vec![5]]).expect("database");
    let path = dir.path().join("golden.db");
    db_write(&path, &database).expect("write database");
    let golden_file: Vec<u8> = [
        b"APDB".as_slice(),  // magic
        &[1],                // format version
        &7u64.to_le_bytes(), // modulus
        &2u32.to_le_bytes(), // block count
        &1u32.to_le_bytes(), // block width
        &3u64.to_le_bytes(), // block 1
        &5u64.to_le_bytes(), // block 2
    ]
    .concat();
    assert_eq!(fs::read(&path).expect("read back"), golden_file);
    assert_eq!(db_read(&path).expect("parse"), database);

    // Golden query frame: length header, type byte, fixed fields, then the
    // two share vectors.
    let frame = Frame::Query(QueryPayload {
        modulus: 7,
        database_len: 2,
        block_width: 1,
        server_point: 1,
        data_shares: vec![3, 5],
        tag_shares: vec![2, 6],
    });
    let golden_frame: Vec<u8> = [
        &56u32.to_le_bytes(), // body length
        [1u8].as_slice(),     // frame type: query
        &7u64.to_le_bytes(),  // modulus
        &2u32.to_le_bytes(),  // database length
        &1u32.to_le_bytes(),  // block width
        &1u64.to_le_bytes(),  // server point
        &3u64.to_le_bytes(),  // data share 1
        &5u64.to_le_bytes(),  // data share 2
        &2u64.to_le_bytes(),  // tag share 1
        &6u64.to_le_bytes(),  // tag share 2
    ]
    .concat();
    assert_eq!(frame.to_bytes(), golden_frame);
    let (parsed, consumed) = Frame::read_from(&mut golden_frame.as_slice())
        .expect("parse frame")
        .expect("a full frame");
    assert_eq!(parsed, frame);
    assert_eq!(consumed, golden_frame.len());

    // Three real server processes, one persistent client session: every
    // result equals a seed-matched in-process execution, and the measured
    // traffic equals the analytic communication cost exactly.
    let ps = params(257, 3, 1, 8, 2);
    let database = seeded_database(ps, 0x61);
    let db_path = dir.path().join("served.db");
    db_write(&db_path, &database).expect("write served database");
    let (_servers, addresses) = spawn_servers(&db_path, 3);
    let mut session =
        ClientSession::connect(ps, &addresses, Some(CONNECT_TIMEOUT)).expect("connect");
    let mut wire_rng = seeded_rng(0x62);
    let mut local_rng = seeded_rng(0x62);
    let rounds = 100u64;
    for i in 0..rounds as usize {
        let alpha = i % ps.database_len() + 1;
        let over_wire = session
            .retrieve(alpha, &mut wire_rng)
            .expect("wire retrieval");
        let (queries, aux) = generate_queries(ps, alpha, &mut local_rng).expect("local queries");
        let answers: Vec<_> = queries
            .iter()
            .map(|query| answer(&database, query).expect("local answer"))
            .collect();
        let local = reconstruct(&answers, aux).expect("local reconstruction");
        assert_eq!(over_wire, local, "wire and in-process results diverged");
        assert_eq!(
            over_wire.value(),
            Some(database.block(alpha).expect("block"))
        );
    }
    let cost = comm_cost(ps);
    assert_eq!(
        session.stats(),
        CommStats {
            upload_bytes: rounds * cost.upload_bytes,
            download_bytes: rounds * cost.download_bytes,
        }
    );

    println!("criterion 6 (wire and persistence fidelity): PASS");
}

#[test]
fn criterion_7_wire_attacks_are_caught() {
    let dir = tempfile::tempdir().expect("tempdir");

    // Data- and tag-flipping proxies in front of one server: with
    // ℓ > t+1 the consistency check catches every tampered retrieval.
    let ps = params(257, 3, 1, 4, 1);
    let database = seeded_database(ps, 0x71);
    let db_path = dir.path().join("flip.db");
    db_write(&db_path, &database).expect("write database");
    let (_servers, addresses) = spawn_servers(&db_path, 3);
    for (strategy, seed) in [("flip_data", 0x72), ("flip_tag", 0x73)] {
        let (_proxy, proxy_address) = spawn_announced(&[
            "proxy",
            "--listen",
            "127.0.0.1:0",
            "--upstream",
            &addresses[2],
            "--strategy",
            strategy,
        ]);
        let tampered = vec![addresses[0].clone(), addresses[1].clone(), proxy_address];
        let mut session =
            ClientSession::connect(ps, &tampered, Some(CONNECT_TIMEOUT)).expect("connect");
        let mut rng = seeded_rng(seed);
        for i in 0..1000usize {
            let alpha = i % ps.database_len() + 1;
            let result = session.retrieve(alpha, &mut rng).expect("retrieval");
            assert!(
                result.is_bot(),
                "{strategy}: tampered retrieval {i} escaped the consistency check"
            );
        }
    }

    // The tag-guessing proxy at ℓ = t+1 — where no consistency check
    // exists — wins at exactly the guessing rate 1/(p−1), measured over
    // real sockets, and an accepted forgery never equals the true block.
    let ps = params(257, 2, 1, 2, 1);
    let database = seeded_database(ps, 0x74);
    let db_path = dir.path().join("guess.db");
    db_write(&db_path, &database).expect("write database");
    let (_servers, addresses) = spawn_servers(&db_path, 2);
    let (_proxy, proxy_address) = spawn_announced(&[
        "proxy",
        "--listen",
        "127.0.0.1:0",
        "--upstream",
        &addresses[1],
        "--strategy",
        "tag_guess",
        "--seed",
        "117",
    ]);
    let tampered = vec![addresses[0].clone(), proxy_address];
    let mut session =
        ClientSession::connect(ps, &tampered, Some(CONNECT_TIMEOUT)).expect("connect");
    let mut rng = seeded_rng(0x76);
    let trials = 100_000;
    let mut accepted = 0u64;
    for i in 0..trials as usize {
        let alpha = i % ps.database_len() + 1;
        let result = session.retrieve(alpha, &mut rng).expect("retrieval");
        if let Some(block) = result.value() {
            assert_ne!(
                block,
                database.block(alpha).expect("block"),
                "tampered retrieval {i} returned the true block"
            );
            accepted += 1;
        }
    }
    let rate = accepted as f64 / trials as f64;
    let bound = ps.integrity_error_bound_f64();
    let half = binomial_halfwidth(bound, trials);
    assert!(
        (rate - bound).abs() <= half,
        "wire forgery rate {rate} outside {bound} ± {half}"
    );

    println!("criterion 7 (end-to-end wire attacks): PASS");
}
