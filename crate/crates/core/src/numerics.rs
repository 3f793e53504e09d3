//! Log-domain arithmetic and iterated-logarithm helpers.
//!
//! The ensemble weight of a program of length `l` at inverse-temperature
//! offset `eps` is `2^{-l} e^{-eps l}`.  Interesting behaviour lives at
//! offsets like `eps = 2^{-127}` or `2^{-65536}`, far below `f64`'s
//! underflow threshold, so two kinds of care are needed:
//!
//! - [`Epsilon`] represents the offset either as an `f64` literal or as an
//!   exact negative power of two with an arbitrarily large exponent.
//! - [`LogScalar`] stores positive quantities by their base-two logarithm
//!   and supports addition without leaving the log domain.
//!
//! The singular behaviour near the critical point is described by the
//! super-logarithm [`slog2`] (how many times one must apply `lg` to fall
//! to 1) and by the chain of iterated logarithms [`iterated_lg`].

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

/// `lg e`, the conversion factor between natural and base-two logs.
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// The fractional part of the super-logarithm of the critical tower scale,
/// `slog2(127) mod 1`, rounded to the two digits used by the closed form.
pub const PHI: f64 = 0.57;

/// Prefactor `2^{PHI - 3}` of the near-critical deficit closed form.
pub const LAMBDA: f64 = 0.185_565_446_328_631_12;

/// A non-negative quantity stored as its base-two logarithm.
///
/// Zero is represented by `log2 = -inf`.  Addition uses the usual
/// `max + log1p` rearrangement so sums of astronomically small terms stay
/// exact to `f64` precision relative to the largest term.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogScalar {
    log2: f64,
}

impl LogScalar {
    /// The zero element.
    pub const ZERO: LogScalar = LogScalar { log2: f64::NEG_INFINITY };

    /// The unit element.
    pub const ONE: LogScalar = LogScalar { log2: 0.0 };

    /// From a base-two logarithm.
    pub fn from_log2(log2: f64) -> Self {
        LogScalar { log2 }
    }

    /// From a plain value; negative input is rejected.
    ///
    /// # Panics
    /// Panics if `v < 0` or `v` is NaN.
    pub fn from_f64(v: f64) -> Self {
        assert!(v >= 0.0, "LogScalar models non-negative values, got {v}");
        LogScalar { log2: v.log2() }
    }

    /// `2^{-e}` for possibly huge `e`.
    pub fn pow2_neg(e: f64) -> Self {
        LogScalar { log2: -e }
    }

    /// The stored base-two logarithm (`-inf` for zero).
    pub fn log2(self) -> f64 {
        self.log2
    }

    /// Back to a plain `f64` (underflows to 0 below about `2^{-1074}`).
    pub fn to_f64(self) -> f64 {
        self.log2.exp2()
    }

    /// True iff the value is zero.
    pub fn is_zero(self) -> bool {
        self.log2 == f64::NEG_INFINITY
    }

    /// Sum, computed without leaving the log domain.
    pub fn add(self, rhs: LogScalar) -> LogScalar {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.log2 >= rhs.log2 { (self.log2, rhs.log2) } else { (rhs.log2, self.log2) };
        LogScalar { log2: hi + (lo - hi).exp2().ln_1p() * LOG2_E }
    }

    /// Product.
    pub fn mul(self, rhs: LogScalar) -> LogScalar {
        if self.is_zero() || rhs.is_zero() {
            return LogScalar::ZERO;
        }
        LogScalar { log2: self.log2 + rhs.log2 }
    }

    /// Scales by `2^shift`.
    pub fn scale_pow2(self, shift: f64) -> LogScalar {
        if self.is_zero() {
            return self;
        }
        LogScalar { log2: self.log2 + shift }
    }
}

impl fmt::Debug for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogScalar(2^{:.6})", self.log2)
    }
}

impl std::iter::Sum for LogScalar {
    fn sum<I: Iterator<Item = LogScalar>>(iter: I) -> Self {
        iter.fold(LogScalar::ZERO, LogScalar::add)
    }
}

/// Inverse-temperature offset `eps = beta - ln 2` above the critical point.
///
/// Two forms: an ordinary float for desk-scale offsets, and an exact
/// `2^{-e}` with BigUint exponent for offsets far beyond `f64` range.
#[derive(Clone, PartialEq)]
pub enum Epsilon {
    /// A plain positive float (or exactly zero for the critical point).
    Literal(f64),
    /// Exactly `2^{-e}`.
    DyadicNeg(BigUint),
}

impl Epsilon {
    /// `2^{-e}` for a machine-sized exponent.
    pub fn pow2_neg(e: u64) -> Self {
        Epsilon::DyadicNeg(BigUint::from(e))
    }

    /// True at the critical point itself.
    pub fn is_zero(&self) -> bool {
        match self {
            Epsilon::Literal(v) => *v == 0.0,
            Epsilon::DyadicNeg(_) => false,
        }
    }

    /// The value as `f64` (0 when it underflows).
    pub fn to_f64(&self) -> f64 {
        match self {
            Epsilon::Literal(v) => *v,
            Epsilon::DyadicNeg(e) => match e.to_f64() {
                Some(ef) if ef <= 1074.0 => (-ef).exp2(),
                _ => 0.0,
            },
        }
    }

    /// `lg(1/eps)`, the depth scale at which suppression turns on.
    ///
    /// `None` at the critical point, where there is no suppression at all.
    pub fn lg_inverse(&self) -> Option<f64> {
        match self {
            Epsilon::Literal(v) if *v == 0.0 => None,
            Epsilon::Literal(v) => Some(-v.log2()),
            Epsilon::DyadicNeg(e) => Some(biguint_to_f64_sat(e)),
        }
    }

    /// `slog2(1/eps)`: how many iterated base-two logs take `1/eps` to 1.
    ///
    /// For `eps = 2^{-e}` this is exactly `slog2(e) + 1`.
    pub fn slog2_of_inverse(&self) -> Option<f64> {
        match self {
            Epsilon::Literal(v) if *v == 0.0 => None,
            Epsilon::Literal(v) => Some(slog2(1.0 / v)),
            Epsilon::DyadicNeg(e) => {
                let e_f = biguint_to_f64_sat(e);
                if e_f.is_finite() {
                    Some(slog2(e_f) + 1.0)
                } else {
                    // lg(1/eps) = e; take slog of e via its own bit length.
                    let lg_e = log2_biguint(e)?;
                    Some(slog2(lg_e) + 2.0)
                }
            }
        }
    }
}

impl fmt::Debug for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Literal(v) => write!(f, "eps={v}"),
            Epsilon::DyadicNeg(e) => write!(f, "eps=2^-{e}"),
        }
    }
}

/// `lg x` for a positive big integer, as `f64` with ~50-bit mantissa accuracy.
pub fn log2_biguint(x: &BigUint) -> Option<f64> {
    if x.is_one() {
        return Some(0.0);
    }
    let bits = x.bits();
    if bits == 0 {
        return None;
    }
    let shift = bits.saturating_sub(53);
    let top = (x >> shift).to_f64()?;
    Some(top.log2() + shift as f64)
}

fn biguint_to_f64_sat(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// The (linearly interpolated) super-logarithm base two.
///
/// Counts how many times `lg` must be applied to bring `x` down to 1,
/// with the standard piecewise-linear interpolation on the last step:
/// for `x` in `(1, 2]` the fractional part is `x - 1`.
///
/// `slog2(2) = 1`, `slog2(4) = 2`, `slog2(16) = 3`, `slog2(65536) = 4`.
pub fn slog2(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "slog2 needs a positive finite input, got {x}");
    if x <= 1.0 {
        // Linear branch below 1 keeps the function continuous and monotone.
        return x - 1.0;
    }
    let mut x = x;
    let mut count = 0.0;
    while x > 2.0 {
        x = x.log2();
        count += 1.0;
    }
    // x in (1, 2]: one more log would land in (0, 1], i.e. slog in (-1, 0].
    if x > 1.0 {
        let y = x.log2(); // in (0, 1]
        count + y // slog(x) = 1 + slog(lg x) = 1 + (y - 1) = y, plus count
    } else {
        count + (x - 1.0)
    }
}

/// The chain `x, lg x, lg lg x, ...` down to (and including) the first
/// element at or below 1.
///
/// Empty input (x <= 0) is rejected.
pub fn iterated_lg(x: f64) -> Vec<f64> {
    assert!(x > 0.0 && x.is_finite(), "iterated_lg needs a positive finite input, got {x}");
    let mut chain = vec![x];
    let mut cur = x;
    while cur > 1.0 {
        cur = cur.log2();
        chain.push(cur);
    }
    chain
}
