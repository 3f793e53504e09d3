//! Self-delimiting integer code built from iterated binary lengths.
//!
//! Every integer `N >= 0` gets a unique code word:
//!
//! - `0 -> "00"`, `1 -> "01"`, `2 -> "10"`, `3 -> "110"`;
//! - for `N > 3`, the word is `"11"`, then a ladder of binary fields, then
//!   a terminating `"0"`.  The ladder writes the chain of iterated binary
//!   lengths of `N` from the top down: the first field is 3 bits wide, each
//!   field's *value* is the *width* of the next field, and the final field
//!   holds `N` itself.
//!
//! Because each field's width is the previous field's value, every field's
//! leading bit is `1`, and that leading bit doubles as the "one more field
//! follows" flag; the single `0` bit that terminates the word is the same
//! flag reading "stop".  The resulting code is prefix-free and complete:
//! every infinite bit sequence begins with exactly one code word.
//!
//! Word lengths satisfy `l(N) = 6 + n_2 + ... + n_k` where
//! `n_k = binlen(N)`, `n_{i-1} = binlen(n_i)`, and the chain stops once the
//! length reaches 3.  The count of length-iterations `k` (0 for `N < 4`)
//! stratifies the code into the layers whose weights the partition engine
//! sums; the largest value reachable in `k` iterations is the tower
//! `L_1 = 3, L_{k+1} = 2^{L_k} - 1`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::bits::BitString;
use crate::numerics::slog2;

/// Fully decoded description of one code word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingProgram {
    /// The encoded integer.
    pub n: BigUint,
    /// Number of length-iterations (0 when `n < 4`).
    pub k: u32,
    /// The field-width chain `n_2..n_k` (empty when `k <= 1`).
    pub chain: Vec<u64>,
    /// Total word length in bits.
    pub length: u64,
    /// The code word itself.
    pub bits: BitString,
}

/// Errors from decoding or enumeration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    /// The stream ended before one full code word was available.
    #[error("bit stream ends inside a code word ({available} bits available)")]
    InsufficientBits {
        /// How many bits the stream held.
        available: usize,
    },
    /// An enumeration request exceeded the safety bound.
    #[error("enumeration up to length {requested} exceeds the bound {max}")]
    EnumerationBound {
        /// The requested maximum length.
        requested: u32,
        /// The hard cap.
        max: u32,
    },
}

/// Longest word length `enumerate_programs` will expand.
pub const ENUMERATION_MAX_LEN: u32 = 30;

/// Number of binary digits of `n`, with `binary_length(0) = 1`.
pub fn binary_length(n: &BigUint) -> u64 {
    n.bits().max(1)
}

/// How many times the binary-length map must be applied to bring `n`
/// below 4.
///
/// `iterations_k(n) = 0` for `n < 4`, else `1 + iterations_k(binlen(n))`.
pub fn iterations_k(n: &BigUint) -> u32 {
    if *n < BigUint::from(4u8) {
        return 0;
    }
    let mut k = 1u32;
    let mut cur = binary_length(n);
    while cur > 3 {
        // binlen of a u64 value
        cur = 64 - cur.leading_zeros() as u64;
        k += 1;
    }
    k
}

/// The width chain `n_2..n_k` for `n >= 4`, in the order the fields appear
/// in the code word (ascending).  Empty for `n < 8`.
pub fn chain_of(n: &BigUint) -> Vec<u64> {
    let mut chain = Vec::new();
    if *n < BigUint::from(4u8) {
        return chain;
    }
    let mut cur = binary_length(n);
    while cur > 3 {
        chain.push(cur);
        cur = 64 - cur.leading_zeros() as u64;
    }
    chain.reverse();
    chain
}

/// Code-word length of `n` without building the word.
pub fn program_length(n: &BigUint) -> u64 {
    if let Some(small) = n.to_u8() {
        match small {
            0 | 1 | 2 => return 2,
            3 => return 3,
            _ => {}
        }
    }
    6 + chain_of(n).iter().sum::<u64>()
}

/// Encodes `n` into its code word plus the derived bookkeeping.
pub fn encode(n: &BigUint) -> CountingProgram {
    if let Some(small) = n.to_u8().filter(|&s| s < 4) {
        let text = ["00", "01", "10", "110"][small as usize];
        let bits: BitString = text.parse().unwrap();
        return CountingProgram {
            n: n.clone(),
            k: 0,
            chain: Vec::new(),
            length: bits.len() as u64,
            bits,
        };
    }
    let chain = chain_of(n);
    let mut bits: BitString = "11".parse().unwrap();
    let mut width = 3usize;
    for &v in &chain {
        bits = bits.concat(&BitString::from_biguint_width(&BigUint::from(v), width));
        width = usize::try_from(v).expect("field width exceeds addressable memory");
    }
    bits = bits.concat(&BitString::from_biguint_width(n, width));
    bits.push(false);
    let length = bits.len() as u64;
    debug_assert_eq!(length, program_length(n));
    CountingProgram {
        n: n.clone(),
        k: chain.len() as u32 + 1,
        chain,
        length,
        bits,
    }
}

/// A successful decode: the value and how many leading bits it occupied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// The decoded integer.
    pub n: BigUint,
    /// Bits consumed from the front of the stream.
    pub consumed: usize,
}

/// Decodes the code word at the front of `stream`.
///
/// Trailing bits beyond the word are ignored, so a stream that merely
/// *extends* a valid word always decodes.  The only failure mode is a
/// stream that ends mid-word.
pub fn decode(stream: &BitString) -> Result<Decoded, CodecError> {
    let insufficient = || CodecError::InsufficientBits { available: stream.len() };
    let b0 = stream.get(0).ok_or_else(insufficient)?;
    let b1 = stream.get(1).ok_or_else(insufficient)?;
    let first = (b0 as u8) * 2 + b1 as u8;
    if first < 3 {
        return Ok(Decoded { n: BigUint::from(first), consumed: 2 });
    }
    // The flag bit at `pos` either terminates the word (0) or doubles as
    // the leading bit of the next field, whose width is the previous value.
    let mut prev = BigUint::from(3u8);
    let mut pos = 2usize;
    loop {
        let flag = stream.get(pos).ok_or_else(insufficient)?;
        if !flag {
            return Ok(Decoded { n: prev, consumed: pos + 1 });
        }
        let width = prev
            .to_usize()
            .filter(|w| pos.checked_add(*w).is_some_and(|end| end <= stream.len()))
            .ok_or_else(insufficient)?;
        let mut value = BigUint::default();
        for i in pos..pos + width {
            value <<= 1u8;
            if stream.get(i).unwrap() {
                value += 1u8;
            }
        }
        prev = value;
        pos += width;
    }
}

/// The largest chain value reachable in `k` length-iterations:
/// `L_1 = 3`, `L_{k+1} = 2^{L_k} - 1`.
///
/// Exact through `k = 4`; beyond that the value is a power tower held
/// symbolically with its super-logarithm.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaLadder {
    /// The exact integer (fits comfortably for `k <= 4`).
    Exact(BigUint),
    /// `2^(2^(...)) - 1`, too large to materialize.
    Tower {
        /// Rung index `k` of the ladder.
        height: u32,
    },
}

impl LambdaLadder {
    /// Super-logarithm of the value (linear interpolation).
    pub fn slog2(&self) -> f64 {
        match self {
            // Exact rungs are at most 2^127 - 1, which f64 #[allow]s fine.
            LambdaLadder::Exact(v) => slog2(v.to_f64().expect("exact rung fits f64")),
            // Each extra rung is one more exponentiation: slog goes up by 1.
            LambdaLadder::Tower { height } => slog2(127.0) + (*height as f64 - 3.0),
        }
    }

    /// Base-two log of the value as f64, when that is representable.
    pub fn lg_approx(&self) -> Option<f64> {
        match self {
            LambdaLadder::Exact(v) => crate::numerics::log2_biguint(v),
            // lg(L_5) = lg(2^(L_4) - 1) ~ L_4 ~ 2^127, still an f64.
            LambdaLadder::Tower { height: 5 } => Some(2f64.powi(127)),
            LambdaLadder::Tower { .. } => None,
        }
    }
}

/// Rung `k >= 1` of the ladder.
pub fn lambda(k: u32) -> LambdaLadder {
    assert!(k >= 1, "ladder rungs start at 1");
    match k {
        1 => LambdaLadder::Exact(BigUint::from(3u8)),
        2 => LambdaLadder::Exact(BigUint::from(7u8)),
        3 => LambdaLadder::Exact(BigUint::from(127u8)),
        4 => LambdaLadder::Exact((BigUint::from(1u8) << 127) - 1u8),
        _ => LambdaLadder::Tower { height: k },
    }
}

/// All code words of length at most `max_len`, with their values, sorted
/// by (length, numeric value).
///
/// Refuses `max_len > ENUMERATION_MAX_LEN`: word counts double per extra
/// bit, so the cap keeps the result set near half a million entries.
pub fn enumerate_programs(max_len: u32) -> Result<Vec<(BitString, BigUint)>, CodecError> {
    if max_len > ENUMERATION_MAX_LEN {
        return Err(CodecError::EnumerationBound { requested: max_len, max: ENUMERATION_MAX_LEN });
    }
    let mut out: Vec<(BitString, BigUint)> = Vec::new();
    for small in 0u8..4 {
        let p = encode(&BigUint::from(small));
        if p.length <= max_len as u64 {
            out.push((p.bits, p.n));
        }
    }
    // Words longer than 3 bits are "11" + width-chain fields + N-field + "0";
    // walk every chain whose total stays within the budget, then every N.
    let mut stack: Vec<(Vec<u64>, u64)> = vec![(Vec::new(), 6)]; // (chain, length so far)
    while let Some((chain, base)) = stack.pop() {
        let width = *chain.last().unwrap_or(&3);
        // All N with binlen(N) = width fit in words of length `base`.
        if base <= max_len as u64 {
            let lo = BigUint::from(1u8) << (width - 1);
            let hi = BigUint::from(1u8) << width;
            let mut n = lo;
            while n < hi {
                out.push((encode(&n).bits, n.clone()));
                n += 1u8;
            }
        }
        // Extend the chain with the next field width.
        let lo = 1u64 << (width - 1);
        let hi = (1u64 << width).saturating_sub(1);
        for next in lo..=hi {
            if base + next > max_len as u64 {
                break;
            }
            let mut longer = chain.clone();
            longer.push(next);
            stack.push((longer, base + next));
        }
    }
    out.sort();
    Ok(out)
}
