//! A tampering proxy: the answer-substitution attack, realized on the wire.
//!
//! The proxy sits between the client and one server, forwards QUERY frames
//! upstream untouched, and mutates ANSWER frames on the way back. It sees
//! exactly what a corrupted server would see — its own server's frames and
//! nothing else — so the coalition-view restriction of the security games
//! is enforced physically rather than by convention.
//!
//! Strategies mirror the in-process adversaries:
//!
//! * `passthrough` — forward everything verbatim (a control).
//! * `flip_data` / `flip_tag` — add 1 to one component of the respective
//!   channel. Blunt tampering the client must reject every time.
//! * `tag_guess` — the optimal forgery against a fresh key: shift the data
//!   component by 1 and the tag component by a freshly guessed key r̂, so
//!   verification accepts exactly when r̂ hits the client's key. Run it
//!   with ℓ = t+1 (no spare answers), where the corrupted point takes part
//!   in data reconstruction and no consistency check runs; with spare
//!   honest servers the client also cross-checks the data polynomial and
//!   rejects regardless of the guess.
//!
//! Mutations stay inside the field — values are shifted mod p, never made
//! out-of-range — because an out-of-range answer would be a *transport*
//! error at the client, not the cryptographic verdict ⊥ these attacks are
//! trying to beat.

use std::net::{SocketAddr, TcpListener, TcpStream};

use itapir_core::rng::{seeded_rng, RandomSource};
use rand::Rng;

use crate::error::Result;
use crate::wire::{AnswerPayload, Frame, ERROR_UPSTREAM_UNAVAILABLE};

/// What the proxy does to ANSWER frames passing through it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamperStrategy {
    /// Forward answers unchanged.
    Passthrough,
    /// Add 1 to one data-channel component.
    FlipData {
        /// Component index to disturb.
        component: usize,
    },
    /// Add 1 to one tag-channel component.
    FlipTag {
        /// Component index to disturb.
        component: usize,
    },
    /// Per answer: draw a nonzero key guess r̂, add 1 to the data component
    /// and r̂ to the tag component.
    TagGuess {
        /// Component index to attack.
        component: usize,
        /// Seed for the guess stream.
        seed: u64,
    },
}

impl TamperStrategy {
    /// Parses a strategy name as used on the command line.
    pub fn parse(name: &str, component: usize, seed: u64) -> Option<Self> {
        match name {
            "passthrough" => Some(Self::Passthrough),
            "flip_data" => Some(Self::FlipData { component }),
            "flip_tag" => Some(Self::FlipTag { component }),
            "tag_guess" => Some(Self::TagGuess { component, seed }),
            _ => None,
        }
    }
}

/// A bound-but-not-yet-running tamper proxy.
#[derive(Debug)]
pub struct Proxy {
    listener: TcpListener,
    upstream: String,
    strategy: TamperStrategy,
    rng: RandomSource,
}

impl Proxy {
    /// Binds `listen` (port 0 lets the OS pick) in front of `upstream`.
    pub fn bind(listen: &str, upstream: &str, strategy: TamperStrategy) -> Result<Self> {
        let seed = match strategy {
            TamperStrategy::TagGuess { seed, .. } => seed,
            _ => 0,
        };
        Ok(Self {
            listener: TcpListener::bind(listen)?,
            upstream: upstream.to_string(),
            strategy,
            rng: seeded_rng(seed),
        })
    }

    /// The actually-bound address.
    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accept loop, one connection at a time. Never returns in normal
    /// operation.
    pub fn run(mut self) -> Result<()> {
        loop {
            let Ok((stream, _)) = self.listener.accept() else {
                continue;
            };
            // A dropped connection ends that session, not the proxy.
            let _ = self.relay(stream);
        }
    }

    /// Relays frames for one client connection.
    fn relay(&mut self, mut client: TcpStream) -> Result<()> {
        client.set_nodelay(true)?;
        let mut upstream = match TcpStream::connect(&self.upstream) {
            Ok(upstream) => upstream,
            Err(_) => {
                let _ = Frame::Error(ERROR_UPSTREAM_UNAVAILABLE).write_to(&mut client);
                return Ok(());
            }
        };
        upstream.set_nodelay(true)?;

        // The modulus rides along in every QUERY; remember it so answer
        // mutations stay inside the field.
        let mut modulus = None;
        loop {
            let frame = match Frame::read_from(&mut client)? {
                Some((frame, _)) => frame,
                None => return Ok(()),
            };
            if let Frame::Query(query) = &frame {
                modulus = Some(query.modulus);
            }
            frame.write_to(&mut upstream)?;

            let reply = match Frame::read_from(&mut upstream)? {
                Some((reply, _)) => reply,
                None => {
                    let _ = Frame::Error(ERROR_UPSTREAM_UNAVAILABLE).write_to(&mut client);
                    return Ok(());
                }
            };
            let reply = match (reply, modulus) {
                (Frame::Answer(answer), Some(p)) if p >= 2 => Frame::Answer(self.mutate(answer, p)),
                (reply, _) => reply,
            };
            reply.write_to(&mut client)?;
        }
    }

    /// Applies the strategy to one answer. Component indexes beyond the
    /// answer width leave it untouched.
    fn mutate(&mut self, mut answer: AnswerPayload, modulus: u64) -> AnswerPayload {
        match self.strategy {
            TamperStrategy::Passthrough => {}
            TamperStrategy::FlipData { component } => {
                if let Some(v) = answer.data.get_mut(component) {
                    *v = add_mod(*v, 1, modulus);
                }
            }
            TamperStrategy::FlipTag { component } => {
                if let Some(v) = answer.tag.get_mut(component) {
                    *v = add_mod(*v, 1, modulus);
                }
            }
            TamperStrategy::TagGuess { component, .. } => {
                // Draw the guess unconditionally so the stream position
                // depends only on how many answers have passed through.
                let guess = self.rng.gen_range(1..modulus);
                if component < answer.data.len() {
                    answer.data[component] = add_mod(answer.data[component], 1, modulus);
                    answer.tag[component] = add_mod(answer.tag[component], guess, modulus);
                }
            }
        }
        answer
    }
}

fn add_mod(value: u64, addend: u64, modulus: u64) -> u64 {
    ((value as u128 + addend as u128) % modulus as u128) as u64
}
