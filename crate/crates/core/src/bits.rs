//! Growable bit strings used for advice encodings and bucket keys.
//!
//! Bits are packed least-significant-bit first within each byte, which is also
//! the wire layout: `to_hex` emits an 8-byte little-endian bit-length header
//! followed by the packed payload, all lowercase hex.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("hex payload is not valid hex: {0}")]
    BadHex(String),
    #[error("hex payload too short: need {need} bytes, got {got}")]
    Truncated { need: usize, got: usize },
    #[error("read past end: bit {pos} of {len}")]
    OutOfRange { pos: usize, len: usize },
    #[error("field width {0} exceeds 64 bits")]
    WidthTooLarge(usize),
}

/// A bit string with O(1) append and random access.
///
/// Multi-bit fields appended with [`BitString::push_uint`] are stored
/// most-significant bit first, so `read_uint` at the same offset and width
/// round-trips the value.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push_bit(&mut self, bit: bool) {
        let byte = self.len / 8;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 1 << (self.len % 8);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most-significant first.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(width <= 64, "field width {width} exceeds 64 bits");
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    pub fn bit(&self, pos: usize) -> Result<bool, BitsError> {
        if pos >= self.len {
            return Err(BitsError::OutOfRange { pos, len: self.len });
        }
        Ok((self.bytes[pos / 8] >> (pos % 8)) & 1 == 1)
    }

    /// Reads `width` bits starting at `pos` as a most-significant-first field.
    pub fn read_uint(&self, pos: usize, width: usize) -> Result<u64, BitsError> {
        if width > 64 {
            return Err(BitsError::WidthTooLarge(width));
        }
        let mut out = 0u64;
        for i in 0..width {
            out = (out << 1) | u64::from(self.bit(pos + i)?);
        }
        Ok(out)
    }

    pub fn extend(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push_bit(other.bit(i).expect("in range"));
        }
    }

    /// Wire format: 8-byte little-endian bit count, then LSB-first packed
    /// payload bytes, lowercase hex.
    pub fn to_hex(&self) -> String {
        let mut raw = Vec::with_capacity(8 + self.bytes.len());
        raw.extend_from_slice(&(self.len as u64).to_le_bytes());
        raw.extend_from_slice(&self.bytes);
        hex::encode(raw)
    }

    pub fn from_hex(s: &str) -> Result<Self, BitsError> {
        let raw = hex::decode(s.trim()).map_err(|e| BitsError::BadHex(e.to_string()))?;
        if raw.len() < 8 {
            return Err(BitsError::Truncated { need: 8, got: raw.len() });
        }
        let len = u64::from_le_bytes(raw[..8].try_into().expect("8 bytes")) as usize;
        let need = len.div_ceil(8);
        let payload = &raw[8..];
        if payload.len() < need {
            return Err(BitsError::Truncated { need: need + 8, got: raw.len() });
        }
        let mut bytes = payload[..need].to_vec();
        // Mask stray bits above `len` so equality is well defined.
        if len % 8 != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= (1u8 << (len % 8)) - 1;
            }
        }
        Ok(Self { bytes, len })
    }

    fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.bit(i).expect("in range"))
    }
}

impl Ord for BitString {
    /// Lexicographic on the bit sequence; a proper prefix sorts first.
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.bits().zip(other.bits()) {
            match a.cmp(&b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(")?;
        for b in self.bits() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, ")")
    }
}
