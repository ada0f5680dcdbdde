//! `itapir` — the command-line surface of the authenticated PIR toolkit.
//!
//! Operational subcommands (`gen-db`, `serve`, `get`, `proxy`) run the
//! protocol across processes; experiment subcommands (`game-correctness`,
//! `game-integrity`, `game-privacy`, `hybrids`) run the security games and
//! exit 0 exactly when the measured values satisfy their analytic bounds;
//! `bench-comm` prints the byte-exact communication cost.
//!
//! Exit codes: 0 success (bounds satisfied), 1 bound violation or runtime
//! failure, 2 invalid invocation. Experiment reports go to stdout as
//! `key=value` lines — terminated by a `seed=<u64>` line — and to `--out`
//! when given; human-oriented notes go to stderr so stdout stays
//! machine-parseable.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use itapir_core::field::{FieldElement, PrimeField};
use itapir_core::games::{
    adversary_by_name, run_correctness, run_hybrids, run_integrity_game,
    run_selective_failure_experiment, Coalition, ExperimentReport, ReportMode, TrialMode,
};
use itapir_core::rng::{mix_seed, seeded_rng};
use itapir_core::scheme::{Database, SchemeParams};
use itapir_net::{comm_cost, db_read, db_write, retrieve_once, Proxy, Server, TamperStrategy};

/// Seed-derivation tag for deterministic database generation, keeping the
/// database stream disjoint from the trial streams.
const DB_STREAM: u64 = 0xdb;

#[derive(Parser)]
#[command(
    name = "itapir",
    version,
    about = "Multi-server authenticated PIR toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random database file.
    GenDb(GenDbArgs),
    /// Serve a database file over TCP.
    Serve(ServeArgs),
    /// Retrieve one block from a fleet of servers.
    Get(GetArgs),
    /// Run a tampering proxy in front of one server.
    Proxy(ProxyArgs),
    /// Honest-execution correctness experiment.
    GameCorrectness(GameCorrectnessArgs),
    /// Integrity game: can a corrupt coalition plant a wrong value?
    GameIntegrity(GameIntegrityArgs),
    /// Selective-failure experiment: real-vs-ideal output gaps.
    GamePrivacy(GamePrivacyArgs),
    /// The four-hybrid chain with coupled randomness.
    Hybrids(HybridsArgs),
    /// Per-retrieval communication cost for a parameter set.
    BenchComm(BenchCommArgs),
}

/// Scheme parameters shared by every protocol-touching subcommand.
#[derive(Args, Debug, Clone, Copy)]
struct SchemeFlags {
    /// Prime field modulus.
    #[arg(long, default_value_t = 257)]
    p: u64,
    /// Server count ℓ.
    #[arg(long, default_value_t = 2)]
    ell: usize,
    /// Privacy threshold t: coalitions of up to t servers learn nothing.
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Database length in blocks.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Block width in field elements.
    #[arg(long, default_value_t = 1)]
    w: usize,
}

impl SchemeFlags {
    fn params(self) -> Result<SchemeParams, CliError> {
        let field = PrimeField::new(self.p)?;
        Ok(SchemeParams::with_max_security(
            self.ell, self.t, self.n, self.w, field,
        )?)
    }
}

/// Trial schedule shared by the experiment subcommands.
#[derive(Args, Debug, Clone, Copy)]
struct TrialFlags {
    /// Monte Carlo trial count.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Master seed; every per-trial stream derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Enumerate the entire randomness space instead of sampling.
    #[arg(long)]
    exhaustive: bool,
}

impl TrialFlags {
    fn mode(self) -> TrialMode {
        if self.exhaustive {
            TrialMode::Exhaustive
        } else {
            TrialMode::Sampled {
                trials: self.trials,
                seed: self.seed,
            }
        }
    }
}

#[derive(Args)]
struct GenDbArgs {
    /// Prime field modulus.
    #[arg(long, default_value_t = 257)]
    p: u64,
    /// Database length in blocks.
    #[arg(long)]
    n: usize,
    /// Block width in field elements.
    #[arg(long, default_value_t = 1)]
    w: usize,
    /// Generation seed; identical seeds write identical files.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Database file to serve.
    #[arg(long)]
    db: PathBuf,
    /// Listen address; port 0 lets the OS pick (the chosen port is printed).
    #[arg(long, default_value = "127.0.0.1:0")]
    listen: String,
}

#[derive(Args)]
struct GetArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Comma-separated server addresses in server-index order (ℓ of them).
    #[arg(long)]
    servers: String,
    /// Block index to retrieve, 1-based.
    #[arg(long)]
    alpha: usize,
    /// Query randomness seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Per-server connect/send/receive timeout in milliseconds.
    #[arg(long, default_value_t = 5_000)]
    timeout_ms: u64,
}

#[derive(Args)]
struct ProxyArgs {
    /// Listen address; port 0 lets the OS pick (the chosen port is printed).
    #[arg(long, default_value = "127.0.0.1:0")]
    listen: String,
    /// The real server to forward to.
    #[arg(long)]
    upstream: String,
    /// Tampering strategy: passthrough | flip_data | flip_tag | tag_guess.
    #[arg(long, default_value = "passthrough")]
    strategy: String,
    /// Block component the strategy disturbs.
    #[arg(long, default_value_t = 0)]
    component: usize,
    /// Seed for the tag_guess stream.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct GameCorrectnessArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    #[command(flatten)]
    trial: TrialFlags,
    /// Database file; omitted → deterministic database derived from --seed.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Also write the report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GameIntegrityArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    #[command(flatten)]
    trial: TrialFlags,
    /// Which adversary plays the game.
    #[arg(long, default_value = "tag_guess")]
    adversary: String,
    /// Retrieval index under attack, 1-based.
    #[arg(long, default_value_t = 1)]
    alpha: usize,
    /// Corrupted servers, comma-separated (default: all but server 1).
    #[arg(long)]
    coalition: Option<String>,
    /// Block component the adversary disturbs.
    #[arg(long, default_value_t = 0)]
    component: usize,
    /// Database file; omitted → deterministic database derived from --seed.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Also write the report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GamePrivacyArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    #[command(flatten)]
    trial: TrialFlags,
    /// Which adversary plays the experiments.
    #[arg(long, default_value = "probe")]
    adversary: String,
    /// First retrieval index for the real experiment.
    #[arg(long, default_value_t = 1)]
    alpha: usize,
    /// Second retrieval index for the real experiment.
    #[arg(long, default_value_t = 2)]
    alpha_b: usize,
    /// Corrupted servers, comma-separated (default: 1..=t).
    #[arg(long)]
    coalition: Option<String>,
    /// Block component the adversary inspects/disturbs.
    #[arg(long, default_value_t = 0)]
    component: usize,
    /// Database file; omitted → deterministic database derived from --seed.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Also write the report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HybridsArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    #[command(flatten)]
    trial: TrialFlags,
    /// Which adversary runs through the chain.
    #[arg(long, default_value = "probe")]
    adversary: String,
    /// Retrieval index for the real hybrids.
    #[arg(long, default_value_t = 1)]
    alpha: usize,
    /// Corrupted servers, comma-separated (default: 1..=t).
    #[arg(long)]
    coalition: Option<String>,
    /// Block component the adversary inspects/disturbs.
    #[arg(long, default_value_t = 0)]
    component: usize,
    /// Database file; omitted → deterministic database derived from --seed.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Also write the report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCommArgs {
    #[command(flatten)]
    scheme: SchemeFlags,
    /// Also write the report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage problems exit 2; runtime failures and bound violations exit 1.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<itapir_core::Error> for CliError {
    fn from(e: itapir_core::Error) -> Self {
        use itapir_core::Error as E;
        match e {
            E::Usage(_)
            | E::InvalidParams(_)
            | E::InvalidCoalition(_)
            | E::AdversaryInfeasible { .. }
            | E::NotPrime(_)
            | E::ModulusTooLarge(_)
            | E::ExhaustiveSpaceTooLarge { .. }
            | E::ExhaustiveSpaceOverflow
            | E::IndexOutOfRange { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<itapir_net::NetError> for CliError {
    fn from(e: itapir_net::NetError) -> Self {
        match e {
            itapir_net::NetError::Validation(_) => CliError::Usage(e.to_string()),
            itapir_net::NetError::Core(core) => CliError::from(core),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::GenDb(args) => gen_db(args),
        Command::Serve(args) => serve(args),
        Command::Get(args) => get(args),
        Command::Proxy(args) => proxy(args),
        Command::GameCorrectness(args) => game_correctness(args),
        Command::GameIntegrity(args) => game_integrity(args),
        Command::GamePrivacy(args) => game_privacy(args),
        Command::Hybrids(args) => hybrids(args),
        Command::BenchComm(args) => bench_comm(args),
    }
}

fn gen_db(args: GenDbArgs) -> Result<ExitCode, CliError> {
    let field = PrimeField::new(args.p)?;
    if args.n == 0 || args.w == 0 {
        return Err(CliError::Usage("--n and --w must be positive".into()));
    }
    let mut rng = seeded_rng(mix_seed(&[args.seed, DB_STREAM]));
    let blocks: Vec<Vec<FieldElement>> = (0..args.n)
        .map(|_| (0..args.w).map(|_| field.sample(&mut rng)).collect())
        .collect();
    let database = Database::new(field, blocks)?;
    db_write(&args.out, &database)?;
    println!(
        "wrote {} blocks of width {} over p={} to {}",
        args.n,
        args.w,
        args.p,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn serve(args: ServeArgs) -> Result<ExitCode, CliError> {
    let database = db_read(&args.db)?;
    let server = Server::bind(&args.listen, database)?;
    // Announce the actual address (port 0 binds pick one); harnesses wait
    // for this line, so flush it through the pipe immediately.
    println!("listening on {}", server.local_addr()?);
    std::io::stdout().flush()?;
    server.run()?;
    Ok(ExitCode::SUCCESS)
}

fn get(args: GetArgs) -> Result<ExitCode, CliError> {
    let params = args.scheme.params()?;
    let addresses: Vec<String> = args
        .servers
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let timeout = Some(Duration::from_millis(args.timeout_ms));
    let mut rng = seeded_rng(args.seed);
    let (result, stats) = retrieve_once(params, &addresses, args.alpha, &mut rng, timeout)?;
    match result.value() {
        Some(block) => println!("{}", hex_block(block)),
        None => println!("BOT"),
    }
    eprintln!(
        "upload_bytes={} download_bytes={}",
        stats.upload_bytes, stats.download_bytes
    );
    Ok(ExitCode::SUCCESS)
}

fn proxy(args: ProxyArgs) -> Result<ExitCode, CliError> {
    let strategy =
        TamperStrategy::parse(&args.strategy, args.component, args.seed).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown strategy '{}', expected passthrough|flip_data|flip_tag|tag_guess",
                args.strategy
            ))
        })?;
    let proxy = Proxy::bind(&args.listen, &args.upstream, strategy)?;
    println!("proxying on {} for {}", proxy.local_addr()?, args.upstream);
    std::io::stdout().flush()?;
    proxy.run()?;
    Ok(ExitCode::SUCCESS)
}

fn game_correctness(args: GameCorrectnessArgs) -> Result<ExitCode, CliError> {
    let params = args.scheme.params()?;
    let database = load_or_generate(&args.db, params, args.trial.seed)?;
    let report = run_correctness(params, &database, args.trial.mode())?;
    emit(&report, &args.out)?;
    let pass = report
        .rate("failure_rate")
        .expect("correctness reports carry failure_rate")
        .is_zero();
    verdict(pass, "failure_rate is zero")
}

fn game_integrity(args: GameIntegrityArgs) -> Result<ExitCode, CliError> {
    let params = args.scheme.params()?;
    let database = load_or_generate(&args.db, params, args.trial.seed)?;
    let members = parse_coalition(args.coalition.as_deref(), 2..=params.servers())?;
    let coalition = Coalition::integrity(params, members)?;
    let mut adversary = adversary_by_name(&args.adversary, args.component)?;
    let report = run_integrity_game(
        params,
        &database,
        args.alpha,
        adversary.as_mut(),
        &coalition,
        args.trial.mode(),
    )?;
    emit(&report, &args.out)?;
    let pass = rate_within_bound(&report, "violation_rate");
    verdict(pass, "violation_rate within w/(p−1)")
}

fn game_privacy(args: GamePrivacyArgs) -> Result<ExitCode, CliError> {
    let params = args.scheme.params()?;
    let database = load_or_generate(&args.db, params, args.trial.seed)?;
    let members = parse_coalition(args.coalition.as_deref(), 1..=params.privacy_threshold())?;
    let coalition = Coalition::privacy(params, members)?;
    let mut adversary = adversary_by_name(&args.adversary, args.component)?;
    let report = run_selective_failure_experiment(
        params,
        &database,
        (args.alpha, args.alpha_b),
        adversary.as_mut(),
        &coalition,
        args.trial.mode(),
    )?;
    emit(&report, &args.out)?;
    let pass = rate_within_bound(&report, "gap_real_real")
        && rate_within_bound(&report, "gap_real_ideal_a")
        && rate_within_bound(&report, "gap_real_ideal_b");
    verdict(pass, "β-gaps within w/(p−1)")
}

fn hybrids(args: HybridsArgs) -> Result<ExitCode, CliError> {
    let params = args.scheme.params()?;
    let database = load_or_generate(&args.db, params, args.trial.seed)?;
    let members = parse_coalition(args.coalition.as_deref(), 1..=params.privacy_threshold())?;
    let coalition = Coalition::privacy(params, members)?;
    let mut adversary = adversary_by_name(&args.adversary, args.component)?;
    let report = run_hybrids(
        params,
        &database,
        args.alpha,
        adversary.as_mut(),
        &coalition,
        args.trial.mode(),
    )?;
    emit(&report, &args.out)?;

    // The chain holds when: H0→H1 disagreement stays within the integrity
    // error, H1 and H2 have the same output rate (exactly under
    // enumeration, within sampling noise otherwise), and the simulated
    // hybrids agree bit-for-bit.
    let d01_ok = rate_within_bound(&report, "disagree_h0_h1");
    let w1w2_ok = match report.mode() {
        ReportMode::Exhaustive => report.rate("w1") == report.rate("w2"),
        ReportMode::Sampled => rate_gap_within_noise(&report, "w1", "w2"),
    };
    let d23_ok = report
        .rate("disagree_h2_h3")
        .expect("hybrid reports carry disagree_h2_h3")
        .is_zero();
    let pass = d01_ok && w1w2_ok && d23_ok;
    verdict(pass, "hybrid chain holds")
}

fn bench_comm(args: BenchCommArgs) -> Result<ExitCode, CliError> {
    let params = args.scheme.params()?;
    let cost = comm_cost(params);
    let mut report = ExperimentReport::new("bench_comm", ReportMode::Exhaustive, 1, 0);
    report.push_text(
        "params",
        format!(
            "p={} ell={} t={} n={} w={}",
            args.scheme.p, args.scheme.ell, args.scheme.t, args.scheme.n, args.scheme.w
        ),
    );
    report.push_int("upload_bytes", cost.upload_bytes as u128);
    report.push_int("download_bytes", cost.download_bytes as u128);
    report.push_int("upload_element_bytes", cost.upload_element_bytes as u128);
    report.push_int(
        "download_element_bytes",
        cost.download_element_bytes as u128,
    );
    emit(&report, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// Loads `--db` (validating it against the scheme flags) or derives a
/// deterministic database from the seed.
fn load_or_generate(
    db: &Option<PathBuf>,
    params: SchemeParams,
    seed: u64,
) -> Result<Database, CliError> {
    match db {
        Some(path) => {
            let database = db_read(path)?;
            database.check_shape(params).map_err(|e| {
                CliError::Usage(format!("--db does not match the scheme flags: {e}"))
            })?;
            Ok(database)
        }
        None => Ok(Database::random(
            params,
            &mut seeded_rng(mix_seed(&[seed, DB_STREAM])),
        )),
    }
}

fn parse_coalition(
    spec: Option<&str>,
    default: impl IntoIterator<Item = usize>,
) -> Result<BTreeSet<usize>, CliError> {
    match spec {
        None => Ok(default.into_iter().collect()),
        Some(s) => s
            .split(',')
            .map(|part| {
                part.trim().parse::<usize>().map_err(|_| {
                    CliError::Usage(format!("--coalition entry '{part}' is not a server index"))
                })
            })
            .collect(),
    }
}

/// Prints the report to stdout and mirrors it to `--out` when given.
fn emit(report: &ExperimentReport, out: &Option<PathBuf>) -> Result<(), CliError> {
    let kv = report.to_kv();
    print!("{kv}");
    if let Some(path) = out {
        fs::write(path, &kv)?;
    }
    Ok(())
}

fn verdict(pass: bool, what: &str) -> Result<ExitCode, CliError> {
    if pass {
        eprintln!("bound check passed: {what}");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("bound check FAILED: {what}");
        Ok(ExitCode::FAILURE)
    }
}

/// Measured rate ≤ analytic bound — exactly under enumeration, within the
/// report's 4σ half-width when sampled.
fn rate_within_bound(report: &ExperimentReport, key: &str) -> bool {
    let rate = report.rate(key).expect("metric present");
    let bound = report
        .rate("analytic_bound")
        .expect("analytic_bound present");
    match report.mode() {
        ReportMode::Exhaustive => rate <= bound,
        ReportMode::Sampled => {
            let ci = report.float("ci_halfwidth").unwrap_or(0.0);
            rate.as_f64() <= bound.as_f64() + ci
        }
    }
}

/// |rate_a − rate_b| within 4σ of the difference of two binomial rates.
fn rate_gap_within_noise(report: &ExperimentReport, key_a: &str, key_b: &str) -> bool {
    let a = report.rate(key_a).expect("metric present");
    let b = report.rate(key_b).expect("metric present");
    let var = |f: itapir_core::games::Frequency| {
        let p = f.as_f64();
        p * (1.0 - p) / f.total() as f64
    };
    let gap = (a.as_f64() - b.as_f64()).abs();
    gap <= 4.0 * (var(a) + var(b)).sqrt()
}

fn hex_block(block: &[FieldElement]) -> String {
    let mut out = String::with_capacity(16 * block.len());
    for element in block {
        for byte in element.to_le_bytes() {
            out.push_str(&format!("{byte:02x}"));
        }
    }
    out
}
