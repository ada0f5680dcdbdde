//! End-to-end tests over real sockets on the loopback interface: honest
//! retrieval against server processes, byte-exact traffic accounting, the
//! wire error contract, and the tamper proxy attacks.

use std::io::Write;
use std::net::TcpStream;
use std::thread;
use std::time::Duration;

use itapir_core::field::PrimeField;
use itapir_core::rng::seeded_rng;
use itapir_core::scheme::{answer, generate_queries, reconstruct, Database, SchemeParams};
use itapir_net::wire::{ERROR_MALFORMED, ERROR_PARAM_MISMATCH};
use itapir_net::{
    comm_cost, db_read, db_write, ClientSession, Frame, NetError, Proxy, QueryPayload, Server,
    TamperStrategy,
};

const TIMEOUT: Option<Duration> = Some(Duration::from_secs(5));

fn params(p: u64, ell: usize, t: usize, n: usize, w: usize) -> SchemeParams {
    SchemeParams::with_max_security(ell, t, n, w, PrimeField::new(p).unwrap()).unwrap()
}

/// Binds a server on an OS-chosen port and runs it on a detached thread.
fn spawn_server(database: Database) -> String {
    let server = Server::bind("127.0.0.1:0", database).unwrap();
    let address = server.local_addr().unwrap().to_string();
    thread::spawn(move || server.run());
    address
}

/// Binds a tamper proxy in front of `upstream` on a detached thread.
fn spawn_proxy(upstream: &str, strategy: TamperStrategy) -> String {
    let proxy = Proxy::bind("127.0.0.1:0", upstream, strategy).unwrap();
    let address = proxy.local_addr().unwrap().to_string();
    thread::spawn(move || proxy.run());
    address
}

#[test]
fn networked_retrieval_matches_in_process_and_comm_cost() {
    let prm = params(257, 3, 1, 8, 2);
    let db = Database::random(prm, &mut seeded_rng(21));
    let addresses: Vec<String> = (0..3).map(|_| spawn_server(db.clone())).collect();
    let mut session = ClientSession::connect(prm, &addresses, TIMEOUT).unwrap();

    // The wire path and the in-process reference consume identical seeds,
    // so they must produce identical results — not just both-correct ones.
    let mut wire_rng = seeded_rng(42);
    let mut local_rng = seeded_rng(42);
    for trial in 0..100usize {
        let alpha = trial % prm.database_len() + 1;
        let wire_result = session.retrieve(alpha, &mut wire_rng).unwrap();
        let (queries, aux) = generate_queries(prm, alpha, &mut local_rng).unwrap();
        let answers: Vec<_> = queries.iter().map(|q| answer(&db, q).unwrap()).collect();
        let local_result = reconstruct(&answers, aux).unwrap();
        assert_eq!(wire_result, local_result);
        assert_eq!(wire_result.value().unwrap(), db.block(alpha).unwrap());
    }

    let cost = comm_cost(prm);
    let stats = session.stats();
    assert_eq!(stats.upload_bytes, 100 * cost.upload_bytes);
    assert_eq!(stats.download_bytes, 100 * cost.download_bytes);
}

#[test]
fn retrieval_works_from_a_persisted_database() {
    let prm = params(257, 2, 1, 4, 1);
    let db = Database::random(prm, &mut seeded_rng(8));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blocks.apdb");
    db_write(&path, &db).unwrap();

    let addresses: Vec<String> = (0..2)
        .map(|_| spawn_server(db_read(&path).unwrap()))
        .collect();
    let mut session = ClientSession::connect(prm, &addresses, TIMEOUT).unwrap();
    let result = session.retrieve(3, &mut seeded_rng(1)).unwrap();
    assert_eq!(result.value().unwrap(), db.block(3).unwrap());
}

#[test]
fn parameter_mismatch_yields_error_code_1_and_keeps_the_connection() {
    let prm = params(7, 2, 1, 2, 1);
    let db = Database::random(prm, &mut seeded_rng(3));
    let address = spawn_server(db);
    let mut stream = TcpStream::connect(&address).unwrap();
    stream.set_read_timeout(TIMEOUT).unwrap();

    // Stamped for a 3-block database the server does not have.
    let bad = QueryPayload {
        modulus: 7,
        database_len: 3,
        block_width: 1,
        server_point: 1,
        data_shares: vec![1, 2, 3],
        tag_shares: vec![1, 2, 3],
    };
    Frame::Query(bad).write_to(&mut stream).unwrap();
    let (frame, _) = Frame::read_from(&mut stream).unwrap().unwrap();
    assert_eq!(frame, Frame::Error(ERROR_PARAM_MISMATCH));

    // The connection survives a parameter mismatch: a well-formed query on
    // the same stream still gets answered.
    let (queries, _) = generate_queries(prm, 1, &mut seeded_rng(4)).unwrap();
    let good = QueryPayload::from_query(prm, &queries[0]).unwrap();
    Frame::Query(good).write_to(&mut stream).unwrap();
    let (frame, _) = Frame::read_from(&mut stream).unwrap().unwrap();
    assert!(matches!(frame, Frame::Answer(_)));
}

#[test]
fn malformed_frames_yield_error_code_2_and_close() {
    let prm = params(7, 2, 1, 2, 1);
    let db = Database::random(prm, &mut seeded_rng(5));
    let address = spawn_server(db);
    let mut stream = TcpStream::connect(&address).unwrap();
    stream.set_read_timeout(TIMEOUT).unwrap();

    // Unknown frame type 9.
    stream.write_all(&[2, 0, 0, 0, 9, 0, 0]).unwrap();
    let (frame, _) = Frame::read_from(&mut stream).unwrap().unwrap();
    assert_eq!(frame, Frame::Error(ERROR_MALFORMED));
    // ... and the server hangs up.
    assert!(Frame::read_from(&mut stream).unwrap().is_none());
}

#[test]
fn passthrough_proxy_is_invisible() {
    let prm = params(257, 3, 1, 4, 1);
    let db = Database::random(prm, &mut seeded_rng(11));
    let mut addresses: Vec<String> = (0..3).map(|_| spawn_server(db.clone())).collect();
    addresses[1] = spawn_proxy(&addresses[1], TamperStrategy::Passthrough);

    let mut session = ClientSession::connect(prm, &addresses, TIMEOUT).unwrap();
    let mut rng = seeded_rng(12);
    for trial in 0..10usize {
        let alpha = trial % prm.database_len() + 1;
        let result = session.retrieve(alpha, &mut rng).unwrap();
        assert_eq!(result.value().unwrap(), db.block(alpha).unwrap());
    }
    // Byte accounting is proxy-transparent too.
    let cost = comm_cost(prm);
    assert_eq!(session.stats().upload_bytes, 10 * cost.upload_bytes);
    assert_eq!(session.stats().download_bytes, 10 * cost.download_bytes);
}

#[test]
fn flip_data_proxy_is_always_rejected() {
    // ℓ=3 with t=1 leaves a spare answer, so the consistency check alone
    // catches a data-channel disturbance.
    let prm = params(257, 3, 1, 4, 1);
    let db = Database::random(prm, &mut seeded_rng(13));
    let mut addresses: Vec<String> = (0..3).map(|_| spawn_server(db.clone())).collect();
    addresses[2] = spawn_proxy(&addresses[2], TamperStrategy::FlipData { component: 0 });

    let mut session = ClientSession::connect(prm, &addresses, TIMEOUT).unwrap();
    let mut rng = seeded_rng(14);
    for trial in 0..20usize {
        let result = session.retrieve(trial % 4 + 1, &mut rng).unwrap();
        assert!(result.is_bot(), "trial {trial} was not rejected");
    }
}

#[test]
fn flip_tag_proxy_is_always_rejected() {
    let prm = params(257, 3, 1, 4, 1);
    let db = Database::random(prm, &mut seeded_rng(15));
    let mut addresses: Vec<String> = (0..3).map(|_| spawn_server(db.clone())).collect();
    addresses[0] = spawn_proxy(&addresses[0], TamperStrategy::FlipTag { component: 0 });

    let mut session = ClientSession::connect(prm, &addresses, TIMEOUT).unwrap();
    let mut rng = seeded_rng(16);
    for trial in 0..20usize {
        let result = session.retrieve(trial % 4 + 1, &mut rng).unwrap();
        assert!(result.is_bot(), "trial {trial} was not rejected");
    }
}

#[test]
fn tag_guess_proxy_wins_at_the_guessing_rate() {
    // ℓ=2 = t+1: no consistency check, so the guess decides. Acceptance of
    // a wrong value should land at 1/(p−1) = 1/4; the band below is 4σ for
    // 400 trials. The data shift never cancels, so the true block can
    // never be accepted.
    let prm = params(5, 2, 1, 2, 1);
    let db = Database::random(prm, &mut seeded_rng(17));
    let upstream = spawn_server(db.clone());
    let addresses = vec![
        spawn_server(db.clone()),
        spawn_proxy(
            &upstream,
            TamperStrategy::TagGuess {
                component: 0,
                seed: 77,
            },
        ),
    ];

    let mut session = ClientSession::connect(prm, &addresses, TIMEOUT).unwrap();
    let mut rng = seeded_rng(18);
    let mut accepted_wrong = 0u32;
    for trial in 0..400usize {
        let alpha = trial % 2 + 1;
        let result = session.retrieve(alpha, &mut rng).unwrap();
        if let Some(block) = result.value() {
            assert_ne!(block, db.block(alpha).unwrap(), "true block accepted");
            accepted_wrong += 1;
        }
    }
    assert!(
        (65..=135).contains(&accepted_wrong),
        "accepted_wrong = {accepted_wrong}, expected ≈ 100"
    );
}

#[test]
fn transport_failures_are_errors_not_bot() {
    // Servers loaded with a database of the wrong shape answer ERROR 1;
    // the client must surface that as a transport error, never as ⊥.
    let client_params = params(7, 2, 1, 2, 1);
    let server_db = Database::random(params(7, 2, 1, 3, 1), &mut seeded_rng(19));
    let addresses = vec![spawn_server(server_db.clone()), spawn_server(server_db)];
    let mut session = ClientSession::connect(client_params, &addresses, TIMEOUT).unwrap();
    let err = session.retrieve(1, &mut seeded_rng(20)).unwrap_err();
    assert!(matches!(err, NetError::ServerError { code: 1 }), "{err}");
}
