//! Statistical mechanics of self-delimiting programs.
//!
//! This crate models an ensemble of binary programs for a two-tape
//! Turing machine in which the program tape is read-only and consumed
//! monotonically, so the set of programs any machine accepts is
//! prefix-free.  Weighting each program of length `l` by `2^{-l} e^{-eps l}`
//! defines a partition function whose `eps -> 0` behaviour is governed by
//! iterated logarithms rather than by any power of `eps`.
//!
//! Module map:
//!
//! - [`bits`] — packed bit strings, the common currency of every module.
//! - [`dyadic`] — exact dyadic rationals (`num / 2^exp`) for lossless counting.
//! - [`numerics`] — log-domain scalars, the inverse-temperature offset type,
//!   the iterated logarithm and super-logarithm.
//! - [`codec`] — the self-delimiting integer code built from iterated
//!   binary-length fields, its length function, and the tower numbers on
//!   which the code's structure pivots.
//! - [`machine`] — the two-tape machine simulator plus the built-in
//!   unary-expander and code-reading machines.
//! - [`prefix`] — prefix-tree census: red/white/black node counts, halting
//!   probability tails, and singularity diagnostics for code families.
//! - [`partition`] — the partition function of the code ensemble: exact
//!   layered evaluation, the near-critical closed form, and a brute-force
//!   cross-check.
//! - [`thermo`] — free energy, mean program length, and heat capacity
//!   derived from the partition function.

pub mod bits;
pub mod codec;
pub mod dyadic;
pub mod machine;
pub mod numerics;
pub mod partition;
pub mod prefix;
pub mod thermo;

pub use bits::BitString;
pub use dyadic::Dyadic;
pub use numerics::{Epsilon, LogScalar};
