//! Packed binary strings.
//!
//! [`BitString`] is an immutable-ish growable sequence of bits stored eight
//! per byte.  It is the interchange type between the integer codec, the
//! machine simulator, and the prefix-tree census: program tapes, code words,
//! and tree addresses are all bit strings.
//!
//! Ordering is length-major: shorter strings sort first, and strings of the
//! same length sort by their numeric (big-endian) value.  This makes a
//! sorted list of code words convenient for prefix-freeness scans, because
//! any prefix of a word sorts somewhere before it.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

/// A sequence of bits, packed LSB-first within each byte.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    /// The empty bit string.
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates a bit string with capacity for `n` bits.
    pub fn with_capacity(n: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(n.div_ceil(8)),
            len: 0,
        }
    }

    /// Builds a bit string from boolean values, first element first.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the string contains no bits.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends one bit.
    pub fn push(&mut self, bit: bool) {
        let byte = self.len / 8;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 1 << (self.len % 8);
        }
        self.len += 1;
    }

    /// Returns bit `i`, or `None` past the end.
    pub fn get(&self, i: usize) -> Option<bool> {
        if i >= self.len {
            return None;
        }
        Some(self.bytes[i / 8] >> (i % 8) & 1 == 1)
    }

    /// Iterates over the bits front to back.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i).unwrap())
    }

    /// True when `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }

    /// Returns `self` followed by `other`.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        for b in other.iter() {
            out.push(b);
        }
        out
    }

    /// The first `n` bits as a new string.
    ///
    /// # Panics
    /// Panics if `n > self.len()`.
    pub fn prefix(&self, n: usize) -> BitString {
        assert!(n <= self.len, "prefix length {n} exceeds string length {}", self.len);
        BitString::from_bits((0..n).map(|i| self.get(i).unwrap()))
    }

    /// Numeric value of the bits read big-endian (first bit most significant).
    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::zero();
        for b in self.iter() {
            v <<= 1u8;
            if b {
                v += 1u8;
            }
        }
        v
    }

    /// The width-`width` big-endian representation of `value`.
    ///
    /// # Panics
    /// Panics if `value` needs more than `width` bits.
    pub fn from_biguint_width(value: &BigUint, width: usize) -> BitString {
        assert!(
            value.bits() as usize <= width,
            "value needs {} bits, width is {width}",
            value.bits()
        );
        BitString::from_bits((0..width).rev().map(|i| value.bit(i as u64)))
    }

    /// Convenience for small values.
    pub fn from_u64_width(value: u64, width: usize) -> BitString {
        Self::from_biguint_width(&BigUint::from(value), width)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

/// Parse from ASCII `0`/`1`; any other character is rejected.
impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(ParseBitStringError { position: i, found: c }),
            }
        }
        Ok(out)
    }
}

/// Error from parsing a bit string out of text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid character {found:?} at position {position}; expected '0' or '1'")]
pub struct ParseBitStringError {
    /// Byte offset of the offending character.
    pub position: usize,
    /// The character found there.
    pub found: char,
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Length-major order: by length first, then by numeric value.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.to_biguint().cmp(&other.to_biguint()))
    }
}
