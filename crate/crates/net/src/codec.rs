//! Bit-block ↔ field-element codec.
//!
//! The retrieval scheme stores blocks as vectors of field elements, while
//! applications usually hold m-bit strings. The bridge packs
//! k = ⌊log₂ p⌋ bits into each element — every k-bit chunk is a value below
//! 2^k ≤ p, so it embeds injectively and no modular reduction can occur —
//! giving a block width of w = ⌈m / k⌉ elements.
//!
//! Bits are numbered LSB-first within each byte, chunks cover consecutive
//! bit ranges, and the last chunk may be narrower than k. Decoding is
//! strict: an element that does not fit its chunk cannot have come from
//! `encode`, so it is rejected rather than truncated.

use itapir_core::field::{FieldElement, PrimeField};

use crate::error::{NetError, Result};

/// Packs m-bit blocks into width-w element vectors and back.
#[derive(Debug, Clone, Copy)]
pub struct BlockCodec {
    field: PrimeField,
    block_bits: usize,
    bits_per_element: u32,
}

impl BlockCodec {
    /// Codec for m-bit blocks over `field`.
    pub fn new(field: PrimeField, block_bits: usize) -> Result<Self> {
        if block_bits == 0 {
            return Err(NetError::Validation(
                "block bit-length must be positive".into(),
            ));
        }
        Ok(Self {
            field,
            block_bits,
            bits_per_element: field.modulus().ilog2(),
        })
    }

    /// Bits carried per element: ⌊log₂ p⌋.
    pub fn bits_per_element(&self) -> u32 {
        self.bits_per_element
    }

    /// Elements per block: ⌈m / ⌊log₂ p⌋⌉.
    pub fn width(&self) -> usize {
        self.block_bits.div_ceil(self.bits_per_element as usize)
    }

    /// Bytes per block on the application side: ⌈m / 8⌉.
    pub fn byte_len(&self) -> usize {
        self.block_bits.div_ceil(8)
    }

    /// Number of bits the chunk at `index` carries (the last may be short).
    fn chunk_bits(&self, index: usize) -> u32 {
        let start = index * self.bits_per_element as usize;
        (self.block_bits - start).min(self.bits_per_element as usize) as u32
    }

    /// Packs an m-bit block (LSB-first within bytes, `byte_len` bytes,
    /// padding bits zero) into `width` field elements.
    pub fn encode(&self, block: &[u8]) -> Result<Vec<FieldElement>> {
        if block.len() != self.byte_len() {
            return Err(NetError::Validation(format!(
                "block is {} bytes, expected {} for {} bits",
                block.len(),
                self.byte_len(),
                self.block_bits
            )));
        }
        if !self.block_bits.is_multiple_of(8) {
            let padding = block[block.len() - 1] >> (self.block_bits % 8);
            if padding != 0 {
                return Err(NetError::Validation(
                    "padding bits beyond the block length must be zero".into(),
                ));
            }
        }
        let bit = |i: usize| u64::from((block[i / 8] >> (i % 8)) & 1);
        Ok((0..self.width())
            .map(|c| {
                let start = c * self.bits_per_element as usize;
                let value = (0..self.chunk_bits(c))
                    .map(|b| bit(start + b as usize) << b)
                    .sum();
                self.field.element(value)
            })
            .collect())
    }

    /// Inverse of [`Self::encode`]. Rejects element vectors that no block
    /// encodes to.
    pub fn decode(&self, elements: &[FieldElement]) -> Result<Vec<u8>> {
        if elements.len() != self.width() {
            return Err(NetError::Validation(format!(
                "{} elements, expected {} for {} bits",
                elements.len(),
                self.width(),
                self.block_bits
            )));
        }
        let mut block = vec![0u8; self.byte_len()];
        for (c, element) in elements.iter().enumerate() {
            let bits = self.chunk_bits(c);
            let value = element.value();
            if bits < 64 && value >> bits != 0 {
                return Err(NetError::Validation(format!(
                    "element {value} does not fit the {bits}-bit chunk {c}"
                )));
            }
            let start = c * self.bits_per_element as usize;
            for b in 0..bits as usize {
                let i = start + b;
                block[i / 8] |= (((value >> b) & 1) as u8) << (i % 8);
            }
        }
        Ok(block)
    }
}
