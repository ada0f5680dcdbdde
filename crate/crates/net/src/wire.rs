//! The length-prefixed binary wire protocol.
//!
//! Every frame is `length (4-byte LE of the body) ‖ type (1 byte) ‖ body`:
//!
//! * **QUERY** (type 1): `p (8) ‖ n (4) ‖ w (4) ‖ server_point (8) ‖
//!   data_shares (8·n) ‖ tag_shares (8·n)`. The scheme parameters ride along
//!   redundantly so every server can validate compatibility statelessly and
//!   fail fast on configuration drift across the fleet.
//! * **ANSWER** (type 2): `data (8·w) ‖ tag (8·w)`.
//! * **ERROR** (type 3): a 2-byte LE code.
//!
//! All integers are little-endian and fixed-width, so the layout is
//! bit-exact for cross-implementation interop; the golden fixtures below
//! pin it. Note what is *not* in a QUERY: the retrieval index and the tag
//! key never leave the client, so a server (or a proxy in front of one)
//! physically sees nothing but its own share vectors.

use std::io::{Read, Write};

use itapir_core::field::PrimeField;
use itapir_core::scheme::{Answer, Query, SchemeParams};

use crate::error::{NetError, Result};

/// Frame type byte for a client query.
const TYPE_QUERY: u8 = 1;
/// Frame type byte for a server answer.
const TYPE_ANSWER: u8 = 2;
/// Frame type byte for an error report.
const TYPE_ERROR: u8 = 3;

/// ERROR code: the query's (p, n, w) disagree with the server's database.
pub const ERROR_PARAM_MISMATCH: u16 = 1;
/// ERROR code: unparseable frame; the sender closes the connection after it.
pub const ERROR_MALFORMED: u16 = 2;
/// ERROR code: a proxy could not reach its upstream server.
pub const ERROR_UPSTREAM_UNAVAILABLE: u16 = 3;

/// Frame header length: 4-byte body length plus 1-byte type.
const HEADER_BYTES: usize = 5;
/// Fixed part of a QUERY body, before the two share vectors.
const QUERY_FIXED_BYTES: usize = 8 + 4 + 4 + 8;
/// Ceiling on accepted body lengths, so a garbage header cannot demand an
/// absurd allocation.
const MAX_BODY_BYTES: u32 = 1 << 26;

/// A parsed QUERY body. Values are raw little-endian words; conversion to
/// field elements (with range validation) happens at [`Self::to_query`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPayload {
    /// Field modulus the client is using.
    pub modulus: u64,
    /// Database length n the client assumes.
    pub database_len: u32,
    /// Block width w the client assumes.
    pub block_width: u32,
    /// The queried server's evaluation point.
    pub server_point: u64,
    /// Data-channel share vector, one value per database block.
    pub data_shares: Vec<u64>,
    /// Tag-channel share vector, one value per database block.
    pub tag_shares: Vec<u64>,
}

impl QueryPayload {
    /// Packages a query for the wire, stamping it with the parameters the
    /// receiving server must match.
    pub fn from_query(params: SchemeParams, query: &Query) -> Result<Self> {
        let database_len = u32::try_from(params.database_len())
            .map_err(|_| NetError::Validation("database length exceeds the wire format".into()))?;
        let block_width = u32::try_from(params.block_width())
            .map_err(|_| NetError::Validation("block width exceeds the wire format".into()))?;
        Ok(Self {
            modulus: params.field().modulus(),
            database_len,
            block_width,
            server_point: query.server_point().value(),
            data_shares: query.data_shares().iter().map(|e| e.value()).collect(),
            tag_shares: query.tag_shares().iter().map(|e| e.value()).collect(),
        })
    }

    /// Validates the raw words against `field` and rebuilds the query.
    pub fn to_query(&self, field: PrimeField) -> Result<Query> {
        let element = |v: u64| {
            field
                .try_element(v)
                .map_err(|e| NetError::Malformed(format!("query share: {e}")))
        };
        let data = self
            .data_shares
            .iter()
            .copied()
            .map(element)
            .collect::<Result<Vec<_>>>()?;
        let tag = self
            .tag_shares
            .iter()
            .copied()
            .map(element)
            .collect::<Result<Vec<_>>>()?;
        let point = element(self.server_point)?;
        Ok(Query::new(point, data, tag)?)
    }

    fn body(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(QUERY_FIXED_BYTES + 16 * self.data_shares.len());
        body.extend_from_slice(&self.modulus.to_le_bytes());
        body.extend_from_slice(&self.database_len.to_le_bytes());
        body.extend_from_slice(&self.block_width.to_le_bytes());
        body.extend_from_slice(&self.server_point.to_le_bytes());
        for share in self.data_shares.iter().chain(&self.tag_shares) {
            body.extend_from_slice(&share.to_le_bytes());
        }
        body
    }

    fn parse(body: &[u8]) -> Result<Self> {
        if body.len() < QUERY_FIXED_BYTES {
            return Err(NetError::Malformed(
                "query body shorter than its fixed fields".into(),
            ));
        }
        let modulus = read_u64(&body[0..8]);
        let database_len = read_u32(&body[8..12]);
        let block_width = read_u32(&body[12..16]);
        let server_point = read_u64(&body[16..24]);
        let n = database_len as usize;
        let expected = QUERY_FIXED_BYTES + 16 * n;
        if body.len() != expected {
            return Err(NetError::Malformed(format!(
                "query body is {} bytes, expected {expected} for n={n}",
                body.len()
            )));
        }
        let words: Vec<u64> = body[QUERY_FIXED_BYTES..]
            .chunks_exact(8)
            .map(read_u64)
            .collect();
        Ok(Self {
            modulus,
            database_len,
            block_width,
            server_point,
            data_shares: words[..n].to_vec(),
            tag_shares: words[n..].to_vec(),
        })
    }
}

/// A parsed ANSWER body: the data-channel and tag-channel inner products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerPayload {
    /// Data-channel answer, one value per block component.
    pub data: Vec<u64>,
    /// Tag-channel answer, one value per block component.
    pub tag: Vec<u64>,
}

impl AnswerPayload {
    /// Packages an in-process answer for the wire.
    pub fn from_answer(answer: &Answer) -> Self {
        Self {
            data: answer.data().iter().map(|e| e.value()).collect(),
            tag: answer.tag().iter().map(|e| e.value()).collect(),
        }
    }

    /// Validates the raw words against `field` and rebuilds the answer.
    pub fn to_answer(&self, field: PrimeField) -> Result<Answer> {
        let element = |v: u64| {
            field
                .try_element(v)
                .map_err(|e| NetError::Malformed(format!("answer component: {e}")))
        };
        let data = self
            .data
            .iter()
            .copied()
            .map(element)
            .collect::<Result<Vec<_>>>()?;
        let tag = self
            .tag
            .iter()
            .copied()
            .map(element)
            .collect::<Result<Vec<_>>>()?;
        Ok(Answer::new(data, tag)?)
    }

    fn body(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(16 * self.data.len());
        for word in self.data.iter().chain(&self.tag) {
            body.extend_from_slice(&word.to_le_bytes());
        }
        body
    }

    fn parse(body: &[u8]) -> Result<Self> {
        if body.is_empty() || !body.len().is_multiple_of(16) {
            return Err(NetError::Malformed(format!(
                "answer body is {} bytes, expected a positive multiple of 16",
                body.len()
            )));
        }
        let words: Vec<u64> = body.chunks_exact(8).map(read_u64).collect();
        let w = words.len() / 2;
        Ok(Self {
            data: words[..w].to_vec(),
            tag: words[w..].to_vec(),
        })
    }
}

/// One protocol frame, ready to encode or freshly decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    /// A client's share vectors for one server.
    Query(QueryPayload),
    /// A server's componentwise inner products.
    Answer(AnswerPayload),
    /// An error code; see the `ERROR_*` constants.
    Error(u16),
}

impl Frame {
    /// Encodes the frame, header included.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (frame_type, body) = match self {
            Frame::Query(q) => (TYPE_QUERY, q.body()),
            Frame::Answer(a) => (TYPE_ANSWER, a.body()),
            Frame::Error(code) => (TYPE_ERROR, code.to_le_bytes().to_vec()),
        };
        let mut bytes = Vec::with_capacity(HEADER_BYTES + body.len());
        bytes.extend_from_slice(&(body.len() as u32).to_le_bytes());
        bytes.push(frame_type);
        bytes.extend_from_slice(&body);
        bytes
    }

    /// Writes the frame and returns the number of bytes put on the wire.
    pub fn write_to(&self, writer: &mut impl Write) -> Result<usize> {
        let bytes = self.to_bytes();
        writer.write_all(&bytes)?;
        writer.flush()?;
        Ok(bytes.len())
    }

    /// Reads one frame. Returns `Ok(None)` on a clean end of stream (the
    /// peer closed between frames); a stream cut mid-frame is an error.
    /// The second tuple element is the number of bytes consumed.
    pub fn read_from(reader: &mut impl Read) -> Result<Option<(Frame, usize)>> {
        let mut header = [0u8; HEADER_BYTES];
        // Probe one byte so EOF-between-frames is distinguishable from a
        // torn header.
        match reader.read(&mut header[..1])? {
            0 => return Ok(None),
            1 => {}
            _ => unreachable!("read of a 1-byte buffer"),
        }
        reader
            .read_exact(&mut header[1..])
            .map_err(|_| NetError::Malformed("truncated frame header".into()))?;
        let length = read_u32(&header[0..4]);
        if length > MAX_BODY_BYTES {
            return Err(NetError::Malformed(format!(
                "frame body of {length} bytes exceeds the {MAX_BODY_BYTES}-byte cap"
            )));
        }
        let mut body = vec![0u8; length as usize];
        reader
            .read_exact(&mut body)
            .map_err(|_| NetError::Malformed("truncated frame body".into()))?;
        let frame = match header[4] {
            TYPE_QUERY => Frame::Query(QueryPayload::parse(&body)?),
            TYPE_ANSWER => Frame::Answer(AnswerPayload::parse(&body)?),
            TYPE_ERROR => {
                if body.len() != 2 {
                    return Err(NetError::Malformed(format!(
                        "error body is {} bytes, expected 2",
                        body.len()
                    )));
                }
                Frame::Error(u16::from_le_bytes([body[0], body[1]]))
            }
            other => {
                return Err(NetError::Malformed(format!("unknown frame type {other}")));
            }
        };
        Ok(Some((frame, HEADER_BYTES + length as usize)))
    }
}

/// Exact size of an encoded QUERY frame for an n-block database.
pub fn query_frame_len(database_len: usize) -> u64 {
    (HEADER_BYTES + QUERY_FIXED_BYTES) as u64 + 16 * database_len as u64
}

/// Exact size of an encoded ANSWER frame for width-w blocks.
pub fn answer_frame_len(block_width: usize) -> u64 {
    HEADER_BYTES as u64 + 16 * block_width as u64
}

/// Communication cost of one full retrieval, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommCost {
    /// Total bytes the client sends: ℓ QUERY frames, headers included.
    pub upload_bytes: u64,
    /// Total bytes the client receives: ℓ ANSWER frames, headers included.
    pub download_bytes: u64,
    /// Share-vector payload within the upload: ℓ·2n elements of 8 bytes.
    pub upload_element_bytes: u64,
    /// Answer payload within the download: ℓ·2w elements of 8 bytes.
    pub download_element_bytes: u64,
}

/// Per-retrieval communication cost, exact to the byte for this wire
/// format. The `*_element_bytes` fields isolate the scheme's intrinsic
/// cost from framing overhead.
pub fn comm_cost(params: SchemeParams) -> CommCost {
    let ell = params.servers() as u64;
    let n = params.database_len() as u64;
    let w = params.block_width() as u64;
    CommCost {
        upload_bytes: ell * query_frame_len(params.database_len()),
        download_bytes: ell * answer_frame_len(params.block_width()),
        upload_element_bytes: ell * 2 * n * 8,
        download_element_bytes: ell * 2 * w * 8,
    }
}

fn read_u64(bytes: &[u8]) -> u64 {
    u64::from_le_bytes(bytes.try_into().expect("8-byte slice"))
}

fn read_u32(bytes: &[u8]) -> u32 {
    u32::from_le_bytes(bytes.try_into().expect("4-byte slice"))
}
