//! The client role: query all ℓ servers concurrently and verify the result.
//!
//! A session holds one persistent connection per server, ordered by server
//! index (connection j talks to the server answering at evaluation point
//! j). Each retrieval generates fresh queries, ships them concurrently,
//! joins, and runs verified reconstruction.
//!
//! Two outcomes must never be confused: ⊥ is the *protocol verdict* that
//! answers were tampered with — a retrieval that completed successfully —
//! while transport failures (unreachable server, timeout, ERROR frame,
//! unparseable bytes) abort the retrieval with an error. Integrity-rate
//! measurements depend on this line being sharp.
//!
//! The session also counts every byte it puts on or takes off the wire, so
//! measured traffic can be compared exactly against
//! [`comm_cost`](crate::wire::comm_cost).

use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use itapir_core::rng::RandomSource;
use itapir_core::scheme::{generate_queries, reconstruct, Answer, RetrievalResult, SchemeParams};

use crate::error::{NetError, Result};
use crate::wire::{Frame, QueryPayload};

/// Cumulative bytes a session has put on and taken off the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommStats {
    /// Bytes sent, frame headers included.
    pub upload_bytes: u64,
    /// Bytes received, frame headers included.
    pub download_bytes: u64,
}

/// A client wired up to all ℓ servers.
#[derive(Debug)]
pub struct ClientSession {
    params: SchemeParams,
    streams: Vec<TcpStream>,
    stats: CommStats,
}

impl ClientSession {
    /// Connects to `addresses`, which must list exactly ℓ endpoints in
    /// server-index order. `timeout` bounds connect, send, and receive on
    /// every stream; `None` waits indefinitely.
    pub fn connect(
        params: SchemeParams,
        addresses: &[String],
        timeout: Option<Duration>,
    ) -> Result<Self> {
        if addresses.len() != params.servers() {
            return Err(NetError::Validation(format!(
                "{} addresses for {} servers",
                addresses.len(),
                params.servers()
            )));
        }
        let streams = addresses
            .iter()
            .map(|address| {
                let resolved = resolve(address)?;
                let stream = match timeout {
                    Some(t) => TcpStream::connect_timeout(&resolved, t)?,
                    None => TcpStream::connect(resolved)?,
                };
                stream.set_nodelay(true)?;
                stream.set_read_timeout(timeout)?;
                stream.set_write_timeout(timeout)?;
                Ok(stream)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            streams,
            stats: CommStats::default(),
        })
    }

    /// One verified retrieval of block `alpha`. Queries go out to all
    /// servers concurrently; the answers are joined in server order before
    /// reconstruction.
    pub fn retrieve(&mut self, alpha: usize, rng: &mut RandomSource) -> Result<RetrievalResult> {
        let params = self.params;
        let (queries, aux) = generate_queries(params, alpha, rng)?;
        let frames = queries
            .iter()
            .map(|q| Ok(Frame::Query(QueryPayload::from_query(params, q)?).to_bytes()))
            .collect::<Result<Vec<_>>>()?;

        let exchanges: Vec<Result<(Answer, u64, u64)>> = thread::scope(|scope| {
            let handles: Vec<_> = self
                .streams
                .iter_mut()
                .zip(&frames)
                .map(|(stream, bytes)| scope.spawn(move || exchange(stream, bytes, params)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("transport thread panicked"))
                .collect()
        });

        let mut answers = Vec::with_capacity(exchanges.len());
        for exchange in exchanges {
            let (answer, up, down) = exchange?;
            self.stats.upload_bytes += up;
            self.stats.download_bytes += down;
            answers.push(answer);
        }
        Ok(reconstruct(&answers, aux)?)
    }

    /// Bytes moved so far, across all retrievals on this session.
    pub fn stats(&self) -> CommStats {
        self.stats
    }
}

/// One query/answer exchange on one stream. Returns the verified-shape
/// answer plus (upload, download) byte counts.
fn exchange(
    stream: &mut TcpStream,
    frame_bytes: &[u8],
    params: SchemeParams,
) -> Result<(Answer, u64, u64)> {
    use std::io::Write;
    stream.write_all(frame_bytes)?;
    stream.flush()?;
    let (frame, consumed) = Frame::read_from(stream)?
        .ok_or_else(|| NetError::Malformed("server closed mid-retrieval".into()))?;
    let payload = match frame {
        Frame::Answer(payload) => payload,
        Frame::Error(code) => return Err(NetError::ServerError { code }),
        Frame::Query(_) => {
            return Err(NetError::Malformed("server sent a QUERY frame".into()));
        }
    };
    if payload.data.len() != params.block_width() {
        return Err(NetError::Malformed(format!(
            "answer width {}, expected {}",
            payload.data.len(),
            params.block_width()
        )));
    }
    let answer = payload.to_answer(params.field())?;
    Ok((answer, frame_bytes.len() as u64, consumed as u64))
}

/// Connects, retrieves once, and reports the traffic — the one-shot used by
/// the command line.
pub fn retrieve_once(
    params: SchemeParams,
    addresses: &[String],
    alpha: usize,
    rng: &mut RandomSource,
    timeout: Option<Duration>,
) -> Result<(RetrievalResult, CommStats)> {
    let mut session = ClientSession::connect(params, addresses, timeout)?;
    let result = session.retrieve(alpha, rng)?;
    Ok((result, session.stats()))
}

fn resolve(address: &str) -> Result<SocketAddr> {
    address
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| NetError::Validation(format!("address {address} resolves to nothing")))
}
