//! Exact dyadic rationals.
//!
//! Probabilities that arise from counting nodes at depth `l` of a binary
//! tree are always of the form `num / 2^exp`.  [`Dyadic`] keeps them exact
//! at arbitrary depth, so tree censuses out to thousands of levels lose
//! nothing to rounding; conversion to `f64` happens only at the edge, for
//! reporting and curve fitting.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// A non-negative rational with a power-of-two denominator: `num / 2^exp`.
#[derive(Clone, PartialEq, Eq)]
pub struct Dyadic {
    num: BigUint,
    exp: u64,
}

impl Dyadic {
    /// `num / 2^exp`, stored in reduced form (odd numerator or exp 0).
    pub fn new(num: BigUint, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.reduce();
        d
    }

    /// Zero.
    pub fn zero() -> Self {
        Dyadic { num: BigUint::zero(), exp: 0 }
    }

    /// One.
    pub fn one() -> Self {
        Dyadic { num: BigUint::one(), exp: 0 }
    }

    /// The integer `n`.
    pub fn from_integer(n: u64) -> Self {
        Dyadic { num: BigUint::from(n), exp: 0 }
    }

    /// `2^{-e}`.
    pub fn pow2_neg(e: u64) -> Self {
        Dyadic { num: BigUint::one(), exp: e }
    }

    /// Numerator after reduction.
    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    /// Base-two logarithm of the denominator after reduction.
    pub fn denom_log2(&self) -> u64 {
        self.exp
    }

    /// True iff the value is zero.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Nearest `f64` (may underflow to 0 for tiny values; fine for reporting).
    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        // Scale so the numerator fits comfortably in f64, then subtract the
        // shifted exponent. Keeps ~63 bits of precision regardless of size.
        let bits = self.num.bits();
        let shift = bits.saturating_sub(63);
        let top = (&self.num >> shift).to_f64().unwrap_or(f64::MAX);
        top * (2.0f64).powi(shift as i32 - self.exp.min(i32::MAX as u64) as i32)
    }

    /// Base-two logarithm as `f64`, or `None` for zero.
    pub fn log2(&self) -> Option<f64> {
        if self.num.is_zero() {
            return None;
        }
        let bits = self.num.bits();
        let shift = bits.saturating_sub(63);
        let top = (&self.num >> shift).to_f64().unwrap_or(f64::MAX);
        Some(top.log2() + shift as f64 - self.exp as f64)
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp);
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    /// Raises both operands to a common denominator.
    fn align(&self, other: &Self) -> (BigUint, BigUint, u64) {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        (a, b, exp)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, exp) = self.align(rhs);
        Dyadic::new(a + b, exp)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    /// # Panics
    /// Panics if the result would be negative.
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, exp) = self.align(rhs);
        assert!(a >= b, "dyadic subtraction would go negative");
        Dyadic::new(a - b, exp)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.align(other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
