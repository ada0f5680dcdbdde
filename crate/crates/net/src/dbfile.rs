//! On-disk database format.
//!
//! The layout is fixed and little-endian throughout:
//!
//! ```text
//! magic "APDB" (4) ‖ version (1) ‖ p (8 LE) ‖ n (4 LE) ‖ w (4 LE)
//!   ‖ payload: n·w elements, 8-byte LE each, block-major
//! ```
//!
//! A file is self-describing for everything the servers need — the field
//! modulus, the block count, and the block width. The protocol-level
//! parameters ℓ and t deliberately never touch disk: they belong to a
//! deployment, not to the data, and the same database can serve any
//! replication factor.
//!
//! Reads are strict: wrong magic, unknown versions, truncation, and
//! trailing bytes are format errors; element values at or above the modulus
//! are validation errors. Nothing is silently reduced.

use std::fs;
use std::path::Path;

use itapir_core::field::PrimeField;
use itapir_core::scheme::Database;

use crate::error::{NetError, Result};

/// File magic, the first four bytes of every database file.
pub const MAGIC: [u8; 4] = *b"APDB";
/// The only format version this build reads or writes.
pub const VERSION: u8 = 1;
/// Bytes before the element payload begins.
const HEADER_BYTES: usize = 4 + 1 + 8 + 4 + 4;

/// Exact size in bytes of a database file with n blocks of width w.
pub fn db_file_len(database_len: usize, block_width: usize) -> u64 {
    HEADER_BYTES as u64 + 8 * database_len as u64 * block_width as u64
}

/// Writes `database` to `path` in the fixed layout. The field modulus,
/// block count, and width are taken from the database itself.
pub fn db_write(path: &Path, database: &Database) -> Result<()> {
    let n = u32::try_from(database.len())
        .map_err(|_| NetError::Validation("database length exceeds the file format".into()))?;
    let w = u32::try_from(database.width())
        .map_err(|_| NetError::Validation("block width exceeds the file format".into()))?;
    let mut bytes = Vec::with_capacity(HEADER_BYTES + 8 * database.len() * database.width());
    bytes.extend_from_slice(&MAGIC);
    bytes.push(VERSION);
    bytes.extend_from_slice(&database.field().modulus().to_le_bytes());
    bytes.extend_from_slice(&n.to_le_bytes());
    bytes.extend_from_slice(&w.to_le_bytes());
    for block in database.blocks() {
        for element in block {
            bytes.extend_from_slice(&element.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a database file back. The returned [`Database`] carries the
/// persisted parameters: its field, [`Database::len`], and
/// [`Database::width`].
pub fn db_read(path: &Path) -> Result<Database> {
    let bytes = fs::read(path)?;
    if bytes.len() < HEADER_BYTES {
        return Err(NetError::Format(format!(
            "file is {} bytes, shorter than the {HEADER_BYTES}-byte header",
            bytes.len()
        )));
    }
    if bytes[0..4] != MAGIC {
        return Err(NetError::Format("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(NetError::Format(format!(
            "unsupported version {}, expected {VERSION}",
            bytes[4]
        )));
    }
    let modulus = u64::from_le_bytes(bytes[5..13].try_into().expect("8-byte slice"));
    let n = u32::from_le_bytes(bytes[13..17].try_into().expect("4-byte slice")) as usize;
    let w = u32::from_le_bytes(bytes[17..21].try_into().expect("4-byte slice")) as usize;
    let expected = HEADER_BYTES as u128 + 8 * n as u128 * w as u128;
    if bytes.len() as u128 != expected {
        return Err(NetError::Format(format!(
            "file is {} bytes, expected {expected} for n={n}, w={w}",
            bytes.len()
        )));
    }
    let field = PrimeField::new(modulus)
        .map_err(|e| NetError::Validation(format!("persisted modulus: {e}")))?;
    let mut words = bytes[HEADER_BYTES..].chunks_exact(8);
    let rows: Vec<Vec<u64>> = (0..n)
        .map(|_| {
            (0..w)
                .map(|_| {
                    u64::from_le_bytes(words.next().expect("length checked").try_into().unwrap())
                })
                .collect()
        })
        .collect();
    Database::from_values(field, &rows)
        .map_err(|e| NetError::Validation(format!("database payload: {e}")))
}
