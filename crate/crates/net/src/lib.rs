//! Persistence, wire protocol, and multi-process runtime for the
//! authenticated multi-server PIR toolkit.
//!
//! [`itapir-core`](itapir_core) defines what queries, answers, and verified
//! reconstruction *are*; this crate moves them between processes:
//!
//! * [`wire`] — the length-prefixed binary frame format, plus the exact
//!   per-retrieval byte cost ([`wire::comm_cost`]).
//! * [`dbfile`] — the on-disk database format.
//! * [`codec`] — packing m-bit application blocks into field elements.
//! * [`server`] — a stateless answering server over one loaded database.
//! * [`client`] — concurrent query fan-out, verified reconstruction, and
//!   byte-exact traffic accounting.
//! * [`proxy`] — a tampering man-in-the-middle realizing the
//!   answer-substitution attacks over real sockets.
//!
//! Throughout, the protocol verdict ⊥ (tampering detected) is a successful
//! retrieval outcome; [`NetError`] is reserved for transport and format
//! failures. See [`error`] for why the two must not blur.

pub mod client;
pub mod codec;
pub mod dbfile;
pub mod error;
pub mod proxy;
pub mod server;
pub mod wire;

pub use client::{retrieve_once, ClientSession, CommStats};
pub use codec::BlockCodec;
pub use dbfile::{db_read, db_write};
pub use error::{NetError, Result};
pub use proxy::{Proxy, TamperStrategy};
pub use server::Server;
pub use wire::{comm_cost, AnswerPayload, CommCost, Frame, QueryPayload};
