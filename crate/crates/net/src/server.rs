//! The server role: answer QUERY frames against an immutable database.
//!
//! A server is deliberately boring. It holds one loaded database, accepts
//! connections concurrently, and for each QUERY frame validates the stamped
//! (p, n, w) against its database, computes the two inner products, and
//! replies with an ANSWER frame. It keeps no per-client state, so identical
//! QUERY frames always yield identical ANSWER frames — and it never learns
//! which block the client is after, because the query shares are all it
//! ever sees.
//!
//! Error behavior follows the wire contract: parameter mismatch → ERROR
//! code 1, connection kept; malformed frame → ERROR code 2, connection
//! closed.

use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use itapir_core::scheme::{answer, Database};

use crate::error::{NetError, Result};
use crate::wire::{AnswerPayload, Frame, ERROR_MALFORMED, ERROR_PARAM_MISMATCH};

/// A bound-but-not-yet-running server.
#[derive(Debug)]
pub struct Server {
    listener: TcpListener,
    database: Arc<Database>,
}

impl Server {
    /// Binds `address` (use port 0 to let the OS pick) over `database`.
    pub fn bind(address: &str, database: Database) -> Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(address)?,
            database: Arc::new(database),
        })
    }

    /// The actually-bound address, for port-0 binds and announcements.
    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accept loop: one handler thread per connection, each reading frames
    /// until the peer closes. Never returns in normal operation.
    pub fn run(self) -> Result<()> {
        for stream in self.listener.incoming() {
            let Ok(stream) = stream else { continue };
            let database = Arc::clone(&self.database);
            thread::spawn(move || {
                // Per-connection failures (peer vanished mid-frame, …) end
                // that connection only.
                let _ = handle_connection(stream, &database);
            });
        }
        Ok(())
    }
}

fn handle_connection(mut stream: TcpStream, database: &Database) -> Result<()> {
    stream.set_nodelay(true)?;
    loop {
        let frame = match Frame::read_from(&mut stream) {
            Ok(Some((frame, _))) => frame,
            Ok(None) => return Ok(()),
            Err(NetError::Malformed(_)) => {
                let _ = Frame::Error(ERROR_MALFORMED).write_to(&mut stream);
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        match frame {
            Frame::Query(payload) => match answer_payload(database, &payload) {
                Ok(reply) => {
                    Frame::Answer(reply).write_to(&mut stream)?;
                }
                Err(code) => {
                    Frame::Error(code).write_to(&mut stream)?;
                    if code == ERROR_MALFORMED {
                        return Ok(());
                    }
                }
            },
            // Only clients send anything else; a server receiving it is
            // being spoken to in the wrong protocol.
            Frame::Answer(_) | Frame::Error(_) => {
                let _ = Frame::Error(ERROR_MALFORMED).write_to(&mut stream);
                return Ok(());
            }
        }
    }
}

/// Validates the stamped parameters and computes the answer, mapping each
/// failure to its wire error code.
fn answer_payload(
    database: &Database,
    payload: &crate::wire::QueryPayload,
) -> std::result::Result<AnswerPayload, u16> {
    let field = database.field();
    let compatible = payload.modulus == field.modulus()
        && payload.database_len as usize == database.len()
        && payload.block_width as usize == database.width();
    if !compatible {
        return Err(ERROR_PARAM_MISMATCH);
    }
    let query = payload.to_query(field).map_err(|_| ERROR_MALFORMED)?;
    let reply = answer(database, &query).map_err(|_| ERROR_MALFORMED)?;
    Ok(AnswerPayload::from_answer(&reply))
}
