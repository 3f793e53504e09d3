//! Partition function of the counting-code ensemble near its critical point.
//!
//! Every program of length `l` carries Boltzmann weight `e^{-beta l}`; at
//! `beta = ln 2` the weight equals the prefix-code measure `2^{-l}` and the
//! total is exactly 1.  This module evaluates the total at `beta = ln 2 + eps`
//! three ways:
//!
//! - [`partition_exact`]: nested sums over the chain structure of the code,
//!   with closed-form geometric inner sums, rigorous subtree pruning, and an
//!   integral-style plateau approximation when an index range is too large to
//!   enumerate (see [`a_factor`]); per-layer contributions are reported.
//! - [`partition_asymptotic`]: the two-line super-logarithmic deficit formula
//!   `1 - lambda * 2^{-slog2(1/eps)}`.
//! - [`brute`]: a deliberately structure-free enumeration used as an oracle.
//!
//! Layer `k` counts how many length fields a program chains through; its
//! value decays to `2^{-(k+3)}` as `eps -> 0`, while for `eps > 0` layers
//! die double-exponentially fast once the ladder scale passes `1/eps` --
//! which is why the deficit `1 - Z` shrinks only super-logarithmically.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::numerics::{log2_biguint, Epsilon, LogScalar, LAMBDA, LOG2_E, PHI};

/// How a partition value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Every contributing range enumerated or summed in closed form.
    Exact,
    /// Pure integral approximation of the inner sums (not produced by the
    /// current evaluator, which always keeps an exact transition window).
    A5Approx,
    /// Exact evaluation except for plateau ranges wider than the enumeration
    /// limit, where the quarter-height integral approximation is used with a
    /// first-order error bound folded into `truncation_bound`.
    Hybrid,
    /// The super-logarithmic closed form.
    Asymptotic,
}

/// Result of a partition evaluation.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    /// Per-layer contributions `(k, Z_k)` for `k = 0..=k_max_used`.
    pub per_k: Vec<(u32, LogScalar)>,
    /// Plain-domain total, summed in ascending `k`.
    pub total: f64,
    /// The deficit `1 - total`, accumulated layer-by-layer in relative
    /// precision (each layer's shortfall from its critical-point limit),
    /// so it stays accurate even when `total` rounds to 1.
    pub one_minus_total: f64,
    /// Rigorous bound on everything left out: the analytic tail of layers
    /// beyond `k_max_used` plus all pruning / plateau error bounds.
    pub truncation_bound: f64,
    /// Deepest layer evaluated.
    pub k_max_used: u32,
    /// Evaluation route actually taken.
    pub method: Method,
}

/// Failure modes of the evaluators.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PartitionError {
    /// The requested tolerance is below what the evaluator can certify.
    #[error("tolerance {requested:e} unreachable; achieved bound {achieved:e}")]
    ToleranceUnreachable { requested: f64, achieved: f64 },
    /// Dyadic offsets `2^{-e}` are only evaluated exactly up to `e = 2^32`;
    /// beyond that every surviving range collapses to the asymptotic regime
    /// and the closed form should be used instead.
    #[error("dyadic exponent {exponent} exceeds the exact-path cap 2^32; use the asymptotic form")]
    ExponentTooLarge { exponent: BigUint },
    /// Literal offsets below 1e-300 flirt with subnormal underflow; the
    /// dyadic representation covers that range exactly.
    #[error("literal offset {eps:e} outside [1e-300, inf); use the dyadic form for deeper values")]
    LiteralOutOfRange { eps: f64 },
    /// Tolerances must sit in (0, 1e-3].
    #[error("tolerance {tol:e} outside (0, 1e-3]")]
    InvalidTolerance { tol: f64 },
}

/// Hard cap on the per-evaluation tolerance parameter.
pub const TOL_MAX: f64 = 1e-3;

/// Ranges with at most this many terms are enumerated exactly; wider ones
/// switch to the plateau / window / dead-zone split.
const ENUM_LIMIT: u64 = 1 << 16;

/// Subtrees whose rigorous upper bound falls below `2^PRUNE_LG` are dropped
/// (the bound is added to `truncation_bound`).  Far stricter than any
/// admissible tolerance times any live value.
const PRUNE_LG: f64 = -80.0;

/// Plateau / collapse approximations are only taken when the neglected
/// exponent shift is below `2^COLLAPSE_LG`, giving a `2^{-59}`-relative
/// error bound per application.
const COLLAPSE_LG: f64 = -60.0;

/// Half-width (in field-width units) of the exactly-evaluated transition
/// window around the suppression cliff `x = lg(1/eps)`.
const WINDOW_HALF: f64 = 60.0;

/// Validated evaluation context for one `eps`.
struct EpsCtx {
    /// `lg(eps)`; `-inf` only at `eps = 0` (then `zero` is set).
    lg_eps: f64,
    /// `eps` as f64; 0 when it underflows (deep dyadic offsets).
    eps_f: f64,
    /// Exactly at the critical point.
    zero: bool,
}

impl EpsCtx {
    fn new(eps: &Epsilon) -> Result<EpsCtx, PartitionError> {
        match eps {
            Epsilon::Literal(v) if *v == 0.0 => {
                Ok(EpsCtx { lg_eps: f64::NEG_INFINITY, eps_f: 0.0, zero: true })
            }
            Epsilon::Literal(v) => {
                if !v.is_finite() || *v < 1e-300 {
                    return Err(PartitionError::LiteralOutOfRange { eps: *v });
                }
                Ok(EpsCtx { lg_eps: v.log2(), eps_f: *v, zero: false })
            }
            Epsilon::DyadicNeg(e) => {
                if *e > BigUint::from(1u64 << 32) {
                    return Err(PartitionError::ExponentTooLarge { exponent: e.clone() });
                }
                let ef = e.to_f64().expect("exponent fits f64 after the cap");
                Ok(EpsCtx { lg_eps: -ef, eps_f: (-ef).exp2(), zero: false })
            }
        }
    }

    /// `eps * y` for plain `y >= 0`, saturating to `inf`.
    fn mul(&self, y: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        if self.eps_f > 0.0 {
            self.eps_f * y
        } else {
            (self.lg_eps + y.log2()).exp2()
        }
    }

    /// `eps * 2^{lg_y}`, saturating, for when only the logarithm of the
    /// multiplicand is available.
    fn mul_lg(&self, lg_y: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        (self.lg_eps + lg_y).exp2()
    }
}

/// `lg(1 - e^{-t})` for `t > 0`, with the true `lg t` supplied separately so
/// the small-`t` branch stays meaningful after `t` underflows to 0.
fn lg_one_minus_exp(t: f64, lg_t: f64) -> f64 {
    if t == f64::INFINITY {
        return 0.0;
    }
    if t < 1e-300 {
        // 1 - e^{-t} = t (1 - t/2 + ...): relative error below t/2.
        return lg_t;
    }
    (-(-t).exp_m1()).log2()
}

/// `lg( sum_{n=a..a+count-1} e^{-eps n} )` with endpoints given both as
/// saturating plain values and as exact logarithms.
fn geo_sum_log2(a_f: f64, lg_a: f64, count_f: f64, lg_count: f64, ctx: &EpsCtx) -> f64 {
    if ctx.zero || ctx.lg_eps == f64::NEG_INFINITY {
        // At (or unmeasurably close to) the critical point every term is 1.
        return lg_count;
    }
    let u = if ctx.eps_f > 0.0 && count_f.is_finite() {
        ctx.eps_f * count_f
    } else {
        ctx.mul_lg(lg_count)
    };
    let v = if ctx.eps_f > 0.0 && a_f.is_finite() { ctx.eps_f * a_f } else { ctx.mul_lg(lg_a) };
    if v == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    // S = e^{-eps a} (1 - e^{-eps count}) / (1 - e^{-eps})
    let num = lg_one_minus_exp(u, ctx.lg_eps + lg_count);
    let den = lg_one_minus_exp(ctx.eps_f, ctx.lg_eps);
    -v * LOG2_E + num - den
}

/// `2^{log2_prefactor} * sum_{n=a..b} e^{-eps n}` as a [`LogScalar`].
///
/// Stable for endpoints of any size: the sum is carried out in closed
/// geometric form in the log domain, so neither `e^{-eps a}` underflow nor
/// astronomically long ranges are a problem.
///
/// # Panics
/// Panics if `a > b`.
pub fn geometric_block(a: &BigUint, b: &BigUint, eps: &Epsilon, log2_prefactor: f64) -> LogScalar {
    assert!(a <= b, "geometric_block needs a <= b");
    let ctx = match EpsCtx::new(eps) {
        Ok(c) => c,
        // Out-of-cap dyadic offsets are still fine here: the sum degenerates
        // to the term count (every factor is 1 to within 2^{-e + lg b}).
        Err(_) => EpsCtx { lg_eps: f64::NEG_INFINITY, eps_f: 0.0, zero: false },
    };
    let count = b - a + 1u32;
    let lg_count = log2_biguint(&count).expect("count >= 1");
    let count_f = count.to_f64().unwrap_or(f64::INFINITY);
    let (a_f, lg_a) = if a.bits() == 0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (a.to_f64().unwrap_or(f64::INFINITY), log2_biguint(a).expect("a >= 1"))
    };
    LogScalar::from_log2(log2_prefactor + geo_sum_log2(a_f, lg_a, count_f, lg_count, &ctx))
}

/// Quarter-height block average `A(x, eps) = (e^{-M eps/2} - e^{-M eps}) / (2 M eps)`
/// with `M = 2^x`: the integral approximation of the average Boltzmann factor
/// over the dyadic block `[M/2, M)`.
///
/// Tends to `1/4` as `M eps -> 0` and dies double-exponentially for
/// `x >> lg(1/eps)`.
///
/// # Panics
/// Panics if `x <= 0` or `eps` is zero.
pub fn a_factor(x: f64, eps: &Epsilon) -> f64 {
    assert!(x > 0.0, "a_factor needs x > 0");
    assert!(!eps.is_zero(), "a_factor needs eps > 0");
    let lg_eps = match eps {
        Epsilon::Literal(v) => v.log2(),
        Epsilon::DyadicNeg(e) => -e.to_f64().unwrap_or(f64::INFINITY),
    };
    let lg_t = x + lg_eps; // t = M eps
    if lg_t < -27.0 {
        // (e^{-t/2} - e^{-t})/(2t) = 1/4 - 3t/16 + O(t^2), O(t^2) < 2^{-54}.
        0.25 - 0.1875 * lg_t.exp2()
    } else {
        let t = lg_t.exp2();
        ((-t / 2.0).exp_m1() - (-t).exp_m1()) / (2.0 * t)
    }
}

/// Lower bound on `lg` of the smallest possible sum of `r` further chain
/// entries after an entry of width `p`: the final entry alone is at least
/// the `(r-1)`-fold iterated power `2^{..2^{p-1}-1..}`.
fn tower_min_lg(p: f64, r: u32) -> f64 {
    let mut lgv = p - 1.0;
    for _ in 1..r {
        lgv = lgv.exp2() - 1.0; // saturates to inf; still a valid lower bound
    }
    lgv
}

/// Upper bound on `lg` of the largest possible sum of `r` further chain
/// entries after width `p` (up to the `+lg r <= 7` slack the caller adds).
fn tower_max_lg(p: f64, r: u32) -> f64 {
    let mut lgv = p;
    for _ in 1..r {
        lgv = lgv.exp2();
    }
    lgv
}

/// One evaluation pass: accumulates error bounds and the hybrid flag.
struct Engine {
    ctx: EpsCtx,
    /// Absolute bound on everything pruned or approximated so far.
    err: f64,
    /// Set when any plateau split replaced exact enumeration.
    split_used: bool,
}

impl Engine {
    fn new(eps: &Epsilon) -> Result<Engine, PartitionError> {
        Ok(Engine { ctx: EpsCtx::new(eps)?, err: 0.0, split_used: false })
    }

    /// Layer value `Z_k`.
    fn zk(&mut self, k: u32) -> LogScalar {
        match k {
            // Lengths 2, 2, 2 and 3: 3 * 2^{-2} e^{-2 eps} + 2^{-3} e^{-3 eps}.
            0 => {
                let t2 = LogScalar::from_log2(3f64.log2() - 2.0 - self.ctx.mul(2.0) * LOG2_E);
                let t3 = LogScalar::from_log2(-3.0 - self.ctx.mul(3.0) * LOG2_E);
                t2.add(t3)
            }
            // Four words of length 6: 4 * 2^{-6} e^{-6 eps}.
            1 => LogScalar::from_log2(-4.0 - self.ctx.mul(6.0) * LOG2_E),
            // Chains start with a width-3 field value in 4..=7.
            _ => (4u32..=7).map(|n2| self.node(n2 as f64, (6 + n2) as f64, k - 2)).sum(),
        }
    }

    /// Subtree value at a chain node: the entry just chosen has width `p`,
    /// the accumulated length so far is `c`, and `r` chain entries remain.
    /// A node with `r = 0` closes the chain: its top field contributes the
    /// `2^{p-1}` count and the word length is exactly `c`.
    fn node(&mut self, p: f64, c: f64, r: u32) -> LogScalar {
        // At the critical point each remaining level halves the Kraft mass:
        // the subtree sums to exactly 2^{p-1-r-c}.
        if self.ctx.zero {
            return LogScalar::from_log2(p - 1.0 - r as f64 - c);
        }
        if r == 0 {
            return LogScalar::from_log2((p - 1.0) - c - self.ctx.mul(c) * LOG2_E);
        }
        if r == 1 {
            // sum_x 2^{x-1} 2^{-(c+x)} e^{-eps (c+x)} over x in [2^{p-1}, 2^p - 1]
            //   = 2^{-(c+1)} e^{-eps c} * geometric block.
            let geo = geo_sum_log2((p - 1.0).exp2(), p - 1.0, (p - 1.0).exp2(), p - 1.0, &self.ctx);
            return LogScalar::from_log2(-(c + 1.0) - self.ctx.mul(c) * LOG2_E + geo);
        }
        let exact_lg = (p - 1.0) - r as f64 - c; // critical-point subtree mass
        // Prune: value <= 2^{exact_lg} e^{-eps * (smallest remaining sum)}.
        let s = self.ctx.mul_lg(tower_min_lg(p, r));
        let bound_lg = exact_lg - s * LOG2_E;
        if bound_lg < PRUNE_LG {
            self.err += bound_lg.exp2();
            return LogScalar::ZERO;
        }
        // Collapse: when even the largest remaining sum D keeps eps*D below
        // 2^{-60}, the suppression factor is e^{-eps c} across the whole
        // subtree to relative 2^{-59}.
        if self.ctx.lg_eps + tower_max_lg(p, r) + 7.0 < COLLAPSE_LG {
            let v = LogScalar::from_log2(exact_lg - self.ctx.mul(c) * LOG2_E);
            self.err += v.to_f64() * (-59f64).exp2();
            return v;
        }
        if r == 2 {
            return self.pair_layer(p, c);
        }
        // r >= 3 with neither prune nor collapse requires the *next* level
        // to straddle the suppression cliff, which pins p near lg lg (1/eps);
        // under the 2^32 exponent cap that means p <= 6 + lg lg lg(1/eps).
        let lo = (p - 1.0).exp2();
        assert!(
            lo <= ENUM_LIMIT as f64,
            "unprunable wide range at r = {r}: width {p} cannot straddle the cliff under the exponent cap"
        );
        let (lo, hi) = ((lo as u64).max(1), (p.exp2() as u64) - 1);
        let mut acc = LogScalar::ZERO;
        for m in lo..=hi {
            acc = acc.add(self.node(m as f64, c + m as f64, r - 1));
        }
        acc
    }

    /// Exact value of one pair-layer term: widths `x` then a closing field,
    /// `term(x) = 2^{-(c+x+1)} e^{-eps (c+x)} * sum_{n in [2^{x-1}, 2^x-1]} e^{-eps n}`.
    fn pair_term(&self, x: f64, c: f64) -> LogScalar {
        let geo = geo_sum_log2((x - 1.0).exp2(), x - 1.0, (x - 1.0).exp2(), x - 1.0, &self.ctx);
        LogScalar::from_log2(-(c + x + 1.0) - self.ctx.mul(c + x) * LOG2_E + geo)
    }

    /// Penultimate level: widths `x` range over `[2^{p-1}, 2^p - 1]` and each
    /// closes with a geometric block.  Enumerated exactly when narrow; split
    /// into plateau / window / dead zones around the cliff `x* = lg(1/eps)`
    /// when wider than the enumeration limit.
    fn pair_layer(&mut self, p: f64, c: f64) -> LogScalar {
        // Reachable (unpruned) pair layers satisfy 2^{p-1} - 1 <= lg(1/eps) + eps-slack,
        // so the range endpoints always fit in u64 under the 2^32 cap.
        assert!(p < 40.0, "pair layer with width {p} survived pruning");
        let lo = (p - 1.0).exp2() as u64;
        let hi = p.exp2() as u64 - 1;
        if hi - lo + 1 <= ENUM_LIMIT {
            let mut acc = LogScalar::ZERO;
            for x in lo..=hi {
                acc = acc.add(self.pair_term(x as f64, c));
            }
            return acc;
        }
        self.split_used = true;
        let x_star = -self.ctx.lg_eps; // suppression cliff
        let mut acc = LogScalar::ZERO;
        // Plateau: t = 2^x eps <= 2^{-60}, so the block average is 1/4 to
        // relative 2^{-59} (the a_factor small-t limit) and
        // term(x) = 2^{-(c+2)} e^{-eps (c+x)}.
        let plateau_hi = ((x_star - WINDOW_HALF).floor().min(hi as f64)) as u64;
        if plateau_hi >= lo {
            let n = (plateau_hi - lo) as f64 + 1.0;
            let geo = geo_sum_log2(lo as f64, (lo as f64).log2(), n, n.log2(), &self.ctx);
            let v = LogScalar::from_log2(-(c + 2.0) - self.ctx.mul(c) * LOG2_E + geo);
            self.err += v.to_f64() * (-59f64).exp2();
            acc = acc.add(v);
        }
        // Window: exact terms across the cliff.
        let w_lo = lo.max(plateau_hi.saturating_add(1));
        let w_hi = hi.min((x_star + WINDOW_HALF) as u64);
        for x in w_lo..=w_hi {
            acc = acc.add(self.pair_term(x as f64, c));
        }
        // Dead zone x > x* + 60: each term is below
        // 2^{-(c+2)} e^{-eps 2^{x-1}} <= 2^{-(c+2)} e^{-2^{59}}; the whole
        // zone is far beyond f64 underflow and is dropped outright.
        acc
    }
}

/// Critical-point limit of layer `k` as a plain f64.
fn layer_limit(k: u32) -> f64 {
    match k {
        0 => 0.875,
        1 => 0.0625,
        _ => (-((k + 3) as f64)).exp2(),
    }
}

/// Exact-path evaluation of a single layer.
///
/// The accumulated pruning/approximation bound must come in under
/// `tol * layer limit`, else [`PartitionError::ToleranceUnreachable`].
pub fn zk_exact(k: u32, eps: &Epsilon, tol: f64) -> Result<LogScalar, PartitionError> {
    if !(tol > 0.0 && tol <= TOL_MAX) {
        return Err(PartitionError::InvalidTolerance { tol });
    }
    let mut engine = Engine::new(eps)?;
    let v = engine.zk(k);
    let achieved = engine.err / layer_limit(k);
    if achieved > tol {
        return Err(PartitionError::ToleranceUnreachable { requested: tol, achieved });
    }
    Ok(v)
}

/// Number of layers needed so the analytic tail `2^{-(k_max+3)}` sits below
/// `tol / 2`, capped at 64 (tail `2^{-67}`).
fn k_max_for(tol: f64) -> u32 {
    let k = ((1.0 / tol).log2().ceil() - 2.0).max(6.0);
    (k as u32).min(64)
}

/// Full exact-path evaluation: layers `0..=k_max`, each by pruned nested
/// summation, plus the analytic tail bound for everything deeper.
pub fn partition_exact(eps: &Epsilon, tol: f64) -> Result<PartitionResult, PartitionError> {
    if !(tol > 0.0 && tol <= TOL_MAX) {
        return Err(PartitionError::InvalidTolerance { tol });
    }
    let mut engine = Engine::new(eps)?;
    let k_max = k_max_for(tol);
    let mut per_k = Vec::with_capacity(k_max as usize + 1);
    let mut total = 0.0;
    let mut one_minus = (-((k_max + 3) as f64)).exp2(); // analytic tail
    for k in 0..=k_max {
        let zk = engine.zk(k);
        total += zk.to_f64();
        // Layer deficit limit - z_k = limit * (1 - 2^{log2 z_k - log2 limit}),
        // formed in the log domain so no precision is lost to cancellation.
        let limit = layer_limit(k);
        let shortfall = -(std::f64::consts::LN_2 * (zk.log2() - limit.log2())).exp_m1();
        one_minus += limit * shortfall;
        per_k.push((k, zk));
    }
    let truncation_bound = (-((k_max + 3) as f64)).exp2() + engine.err;
    if truncation_bound > tol {
        return Err(PartitionError::ToleranceUnreachable {
            requested: tol,
            achieved: truncation_bound,
        });
    }
    Ok(PartitionResult {
        per_k,
        total,
        one_minus_total: one_minus,
        truncation_bound,
        k_max_used: k_max,
        method: if engine.split_used { Method::Hybrid } else { Method::Exact },
    })
}

/// Super-logarithmic closed form `1 - lambda * 2^{-slog2(1/eps)}`.
///
/// Works for dyadic offsets of any size (the super-logarithm needs only the
/// exponent, never `2^e` itself).
///
/// # Panics
/// Panics at `eps = 0` (the deficit formula needs a positive offset).
pub fn partition_asymptotic(eps: &Epsilon) -> f64 {
    let s = eps.slog2_of_inverse().expect("asymptotic form needs eps > 0");
    1.0 - LAMBDA * (-s).exp2()
}

/// Closed-form total `1 - 2^{-(K+3)}` at the ladder points `1/eps = Lambda_K`.
///
/// # Panics
/// Panics for `K < 2`.
pub fn rare_case_value(k: u32) -> f64 {
    assert!(k >= 2, "the ladder identity starts at K = 2");
    1.0 - (-((k + 3) as f64)).exp2()
}

/// Effective deepest contributing layer, `slog2(1/eps) - phi`.
///
/// # Panics
/// Panics at `eps = 0`.
pub fn k_of_eps(eps: &Epsilon) -> f64 {
    eps.slog2_of_inverse().expect("k_of_eps needs eps > 0") - PHI
}

pub mod brute {
    //! Structure-free reference evaluation: per-length program counts from
    //! direct loops over the chain ranges, plain-f64 Boltzmann sums, and
    //! closed-form tails for the two layers that reach beyond any feasible
    //! length cutoff.  Shares no code with the log-domain engine.

    /// Number of programs of each length `l <= l_max` (chains of at most two
    /// fields are covered completely once `l_max >= 140`).
    ///
    /// # Panics
    /// Panics if `l_max > 145` (deeper layers would need big integers).
    pub fn counts_by_length(l_max: u32) -> Vec<(u32, u128)> {
        assert!(l_max <= 145, "three-field chains exceed u128 territory");
        let mut c = vec![0u128; l_max as usize + 1];
        let bump = |c: &mut Vec<u128>, l: u32, n: u128| {
            if l <= l_max {
                c[l as usize] += n;
            }
        };
        bump(&mut c, 2, 3); // 00, 01, 10
        bump(&mut c, 3, 1); // 110
        bump(&mut c, 6, 4); // 11 + three bits + 0, value 4..=7
        for n2 in 4u32..=7 {
            // two fields: width-3 value n2, then a width-n2 value
            bump(&mut c, 6 + n2, 1u128 << (n2 - 1));
            // three fields: widths 3, n2, n3
            for n3 in (1u32 << (n2 - 1))..=((1u32 << n2) - 1) {
                bump(&mut c, 6 + n2 + n3, 1u128 << (n3 - 1));
            }
        }
        c.into_iter().enumerate().map(|(l, n)| (l as u32, n)).collect()
    }

    /// `sum_{n=a..b} e^{-eps n}` and `sum_{n=a..b} n e^{-eps n}` in plain
    /// f64, for ranges whose length may overflow anything but f64.
    fn geo_sums(a: f64, b: f64, eps: f64) -> (f64, f64) {
        let q = (-eps).exp();
        let m = b - a + 1.0;
        let qa = (-eps * a).exp();
        let qm = (-eps * m).exp();
        let one_minus_q = -(-eps).exp_m1();
        let s0 = qa * (1.0 - qm) / one_minus_q;
        // sum (a+j) q^{a+j} = a s0 + q^a * q (1 - m q^{m-1} + (m-1) q^m) / (1-q)^2
        let mq = (m.ln() - eps * (m - 1.0)).exp(); // m q^{m-1}, safe for huge m
        let m1q = if m > 1.5 { ((m - 1.0).ln() - eps * m).exp() } else { 0.0 };
        let s1 = a * s0 + qa * q * (1.0 - mq + m1q) / (one_minus_q * one_minus_q);
        (s0, s1)
    }

    /// Weighted sums `(Z, sum l w_l)` over all programs: explicit counts up
    /// to length 140 plus the closed-form three-field-chain tail (widths 3,
    /// n2, n3, n4).  Layers deeper still start at length `2^127` and are
    /// below `e^{-eps 2^127}`; for the supported `eps >= 1e-3` that is zero.
    fn weighted_sums(eps: f64) -> (f64, f64) {
        assert!(eps >= 1e-3, "brute-force path supports eps >= 1e-3");
        let beta = std::f64::consts::LN_2 + eps;
        let mut z = 0.0;
        let mut zl = 0.0;
        for (l, n) in counts_by_length(140) {
            if n > 0 {
                let w = n as f64 * (-beta * l as f64).exp();
                z += w;
                zl += l as f64 * w;
            }
        }
        // four-field chains: widths 3, n2, n3, n4 with n4 in [2^{n3-1}, 2^{n3}-1];
        // weight 2^{n4-1} 2^{-l} e^{-eps l} summed in closed form over n4.
        for n2 in 4u32..=7 {
            for n3 in (1u64 << (n2 - 1))..=((1u64 << n2) - 1) {
                let c0 = (6 + n2 as u64 + n3) as f64;
                let pref = (-(c0 + 1.0) * std::f64::consts::LN_2 - eps * c0).exp();
                let a = ((n3 - 1) as f64).exp2();
                let b = (n3 as f64).exp2() - 1.0;
                let (s0, s1) = geo_sums(a, b, eps);
                z += pref * s0;
                zl += pref * (c0 * s0 + s1);
            }
        }
        (z, zl)
    }

    /// Partition value by direct enumeration plus analytic tails.
    pub fn partition_value(eps: f64) -> f64 {
        weighted_sums(eps).0
    }

    /// Mean program length as an explicit weighted mean (no differencing).
    pub fn average_length(eps: f64) -> f64 {
        let (z, zl) = weighted_sums(eps);
        zl / z
    }
}
