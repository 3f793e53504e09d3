//! Thermodynamic observables of the program ensemble.
//!
//! The inverse temperature is `beta = ln 2 + eps`.  Everything here is a
//! plain-f64 layer over [`partition_exact`](crate::partition::partition_exact):
//! free energy from `ln Z`, mean program length as the logarithmic derivative
//! `-d ln Z / d beta` by central differences, and a second differencing pass
//! for the growth rate of the mean length.  Near the critical point the mean
//! length diverges like `1 / (eps * lg(1/eps) * lg lg(1/eps) * ...)`, and
//! [`avg_length_asymptotic`] evaluates that product form directly.

use std::f64::consts::LN_2;
use std::sync::OnceLock;

use crate::numerics::{iterated_lg, Epsilon};
use crate::partition::partition_exact;

/// Internal evaluation tolerance for the partition calls.
const TOL: f64 = 1e-9;

/// One row of a thermodynamic sweep.
#[derive(Debug, Clone, Copy)]
pub struct ThermoPoint {
    pub beta: f64,
    pub eps: f64,
    pub z: f64,
    pub free_energy: f64,
    pub avg_length: f64,
    pub heat_capacity: f64,
}

fn z_of(eps: f64) -> f64 {
    partition_exact(&Epsilon::Literal(eps), TOL)
        .expect("literal offsets in the thermodynamic range evaluate cleanly")
        .total
}

/// Central difference of `ln f` at `x`: `(ln f(x-h) - ln f(x+h)) / (2h)`,
/// the workhorse behind every logarithmic derivative in this module.
pub fn central_log_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    assert!(h > 0.0 && h < x, "step must satisfy 0 < h < x");
    (f(x - h).ln() - f(x + h).ln()) / (2.0 * h)
}

/// Free energy per symbol, `-ln Z / beta`.
///
/// Zero at the critical point, approaching 2 (the minimum program length)
/// deep in the low-temperature phase.
///
/// # Panics
/// Panics if `eps` is not a positive finite value.
pub fn free_energy(eps: f64) -> f64 {
    assert!(eps > 0.0 && eps.is_finite(), "free energy needs eps > 0");
    let beta = LN_2 + eps;
    -z_of(eps).ln() / beta
}

/// Mean program length `<l> = -d ln Z / d beta`, by central differences with
/// step `h` (default `eps / 16`).
///
/// Always above 2 and non-increasing in `beta`; diverges super-polynomially
/// slowly as `eps -> 0`.
///
/// # Panics
/// Panics if `eps` is not positive finite or `h` is outside `(0, eps)`.
pub fn avg_length(eps: f64, h: Option<f64>) -> f64 {
    assert!(eps > 0.0 && eps.is_finite(), "avg_length needs eps > 0");
    let h = h.unwrap_or(eps / 16.0);
    central_log_diff(z_of, eps, h)
}

/// Growth rate of the mean length against temperature,
/// `-d ln <l> / d beta`, with outer step `h` (default `eps / 16`) and the
/// inner length evaluations at step `h / 4`.
///
/// Positive, and growing without bound as the critical point is approached:
/// the transition sharpens instead of settling.
///
/// # Panics
/// Panics if `eps` is not positive finite or `h` is outside `(0, eps)`.
pub fn heat_capacity(eps: f64, h: Option<f64>) -> f64 {
    assert!(eps > 0.0 && eps.is_finite(), "heat_capacity needs eps > 0");
    let h = h.unwrap_or(eps / 16.0);
    central_log_diff(|e| avg_length(e, Some(h / 4.0)), eps, h)
}

/// The divergence-rate product for the mean length: `1 / (eps * P)` where
/// `P` multiplies the iterated logarithms of `1/eps` (all entries after
/// `1/eps` itself while they stay above 1, the last one squared), scaled so
/// the value agrees with [`avg_length`] at `eps = 2^-10`.
///
/// Accepts dyadic offsets far beyond f64 range, though the *result*
/// overflows to infinity once `lg(1/eps)` passes ~1000.
///
/// # Panics
/// Panics at `eps = 0`.
pub fn avg_length_asymptotic(eps: &Epsilon) -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    let norm =
        *NORM.get_or_init(|| avg_length((-10f64).exp2(), None) / raw_divergence_rate(10.0));
    let lg_inv = eps.lg_inverse().expect("asymptotic length needs eps > 0");
    norm * raw_divergence_rate(lg_inv)
}

/// Unnormalized product form `1 / (eps * P)` with `lg(1/eps)` given.
fn raw_divergence_rate(lg_inv: f64) -> f64 {
    let mut p = 1.0;
    let mut last = 1.0;
    for f in iterated_lg(lg_inv) {
        if f > 1.0 {
            p *= f;
            last = f;
        }
    }
    lg_inv.exp2() / (p * last)
}

/// Full observable set at one offset.
pub fn thermo_point(eps: f64) -> ThermoPoint {
    ThermoPoint {
        beta: LN_2 + eps,
        eps,
        z: z_of(eps),
        free_energy: free_energy(eps),
        avg_length: avg_length(eps, None),
        heat_capacity: heat_capacity(eps, None),
    }
}

/// Two-level toy ensemble `3 e^{-2 beta} + e^{-3 beta}`: three words of
/// length 2 and one of length 3, whose observables are elementary closed
/// forms.  Used to validate the differencing machinery end to end.
pub fn toy_partition(beta: f64) -> f64 {
    3.0 * (-2.0 * beta).exp() + (-3.0 * beta).exp()
}
