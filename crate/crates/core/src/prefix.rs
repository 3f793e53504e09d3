//! Binary-tree censuses of prefix-free code families.
//!
//! Picture the complete binary tree of bit strings.  Each node at depth `l`
//! is **red** if it is a code word, **white** if a proper ancestor is (the
//! subtree is spent), and **black** otherwise (still live).  Counting the
//! three colours level by level turns a prefix code into a sequence of exact
//! dyadic masses: `P_l = n_red 2^{-l}` is the probability that a uniformly
//! random bit stream commits to a word at exactly `l` bits, and
//! `Q_l = w_white 2^{-l}` the probability it has already committed.  How
//! fast `P_l` decays dictates the character of the ensemble's critical
//! singularity, which [`power_law_singularity_check`] measures directly.
//!
//! Three families are covered: the counting code itself, run-terminated
//! codes with a fixed all-ones terminator, and the self-calibrating variant
//! whose terminator length grows with the depth (`bit_length(l)` ones at
//! depth `l`), tuned so that `P_l` decays as a genuine power law.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::codec::{self, CodecError};
use crate::dyadic::Dyadic;

/// A prefix-free code family whose tree census this module can take.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeFamily {
    /// The chained-length counting code (via full enumeration; capped depth).
    Counting,
    /// Words end with the first run of `order` consecutive ones.
    Fibonacci {
        /// Terminator run length; at least 2.
        order: u32,
    },
    /// Run-terminated with a depth-dependent terminator: a word closes at
    /// depth `l` when its trailing run of ones reaches `bit_length(l)`.
    GeneralizedFibonacci,
}

/// One level of the colour census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationStats {
    /// Tree depth `l >= 1`.
    pub level: u32,
    /// Code words at exactly this depth.
    pub n_red: BigUint,
    /// Live nodes: no code word on the path yet, subtree still open.
    pub m_black: BigUint,
    /// Spent nodes: a proper ancestor is a code word.
    pub w_white: BigUint,
    /// Commitment mass at this depth, `n_red / 2^l`, exact.
    pub p_l: Dyadic,
    /// Spent mass, `w_white / 2^l`, exact.
    pub q_l: Dyadic,
}

/// Errors from census or fitting routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PrefixError {
    /// Counting-code censuses require full enumeration, which is capped.
    #[error("census depth {requested} exceeds the enumeration bound {max}")]
    EnumerationBound { requested: u32, max: u32 },
    /// Too few nonzero mass points in the requested window to fit a decay.
    #[error("decay fit needs {needed} nonzero mass points, found {found}")]
    DegenerateFit { found: usize, needed: usize },
    /// The truncated mass series cannot resolve the requested offset: the
    /// spread left by the unresolved tail exceeds the accuracy target.
    #[error("series truncation bound not met: tail spread {spread:e} exceeds {limit:e}")]
    SeriesTruncation { spread: f64, limit: f64 },
}

impl From<CodecError> for PrefixError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::EnumerationBound { requested, max } => {
                PrefixError::EnumerationBound { requested, max }
            }
            CodecError::InsufficientBits { .. } => {
                unreachable!("enumeration never decodes a stream")
            }
        }
    }
}

/// Depth the singularity check sums explicitly; the rest is tail mass.
pub const SINGULARITY_DEPTH: u32 = 4096;

/// Largest admissible tail spread in [`power_law_singularity_check`].
const SPREAD_LIMIT: f64 = 1e-4;

fn validate(family: &CodeFamily) {
    if let CodeFamily::Fibonacci { order } = family {
        assert!(*order >= 2, "terminator runs shorter than 2 are degenerate");
    }
}

/// Terminator run length in force at `level` (not used for the counting code).
fn run_threshold(family: &CodeFamily, level: u32) -> u32 {
    match family {
        CodeFamily::Fibonacci { order } => *order,
        CodeFamily::GeneralizedFibonacci => 32 - level.leading_zeros(),
        CodeFamily::Counting => unreachable!("counting censuses use enumeration"),
    }
}

/// Red-node counts for levels `0..=max_level`.
///
/// Run-terminated families admit an exact dynamic program over live nodes
/// keyed by their trailing run of ones: appending `0` resets the run,
/// appending `1` extends it, and a node turns red the moment the run reaches
/// the terminator length at its own depth.  Since the threshold never
/// decreases with depth, a live run can never silently overshoot it.
fn red_counts(family: &CodeFamily, max_level: u32) -> Result<Vec<BigUint>, PrefixError> {
    if let CodeFamily::Counting = family {
        let words = codec::enumerate_programs(max_level)?;
        let mut reds = vec![BigUint::zero(); max_level as usize + 1];
        for (bits, _) in words {
            reds[bits.len()] += 1u32;
        }
        return Ok(reds);
    }
    let mut live: Vec<BigUint> = vec![BigUint::one()]; // the root, trailing run 0
    let mut reds = vec![BigUint::zero()];
    for level in 1..=max_level {
        let thresh = run_threshold(family, level) as usize;
        let mut next = vec![BigUint::zero(); thresh.max(1)];
        let mut red = BigUint::zero();
        let mut zero_children = BigUint::zero();
        for (run, cnt) in live.iter().enumerate() {
            if cnt.is_zero() {
                continue;
            }
            zero_children += cnt;
            match (run + 1).cmp(&thresh) {
                Ordering::Equal => red += cnt,
                Ordering::Less => next[run + 1] += cnt,
                Ordering::Greater => unreachable!("live run exceeded the terminator length"),
            }
        }
        next[0] = zero_children;
        live = next;
        reds.push(red);
    }
    Ok(reds)
}

/// Colour census for levels `1..=max_level`.
///
/// Whites follow the exact recursion `w_{l+1} = 2 (w_l + n_l)` (children of
/// spent or red nodes are spent), blacks are the remainder, and the dyadic
/// masses are carried without rounding at any depth.
pub fn generation_stats(
    family: &CodeFamily,
    max_level: u32,
) -> Result<Vec<GenerationStats>, PrefixError> {
    validate(family);
    let reds = red_counts(family, max_level)?;
    let mut stats = Vec::with_capacity(max_level as usize);
    let mut white = BigUint::zero();
    for level in 1..=max_level {
        white = (white + &reds[level as usize - 1]) << 1;
        let n = reds[level as usize].clone();
        let m = (BigUint::one() << level) - &n - &white;
        stats.push(GenerationStats {
            level,
            p_l: Dyadic::new(n.clone(), level as u64),
            q_l: Dyadic::new(white.clone(), level as u64),
            n_red: n,
            m_black: m,
            w_white: white.clone(),
        });
    }
    Ok(stats)
}

/// Total code-word mass at depths `1..=level`: `sum_j P_j = Q_{level+1}`,
/// exact.  Reaches 1 only in the limit (the codes are complete but infinite).
pub fn kraft_partial_sum(family: &CodeFamily, level: u32) -> Result<Dyadic, PrefixError> {
    validate(family);
    let reds = red_counts(family, level)?;
    let mut acc = BigUint::zero();
    for r in &reds[1..] {
        acc = (acc << 1) + r;
    }
    Ok(Dyadic::new(acc, level as u64))
}

/// Which decay law fits the commitment masses better.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `P_l ~ r^l`: the fitted value is the per-level ratio `r`.
    Exponential,
    /// `P_l ~ l^{-alpha}`: the fitted value is the exponent `alpha`.
    PowerLaw,
}

/// Fitted decay of the commitment masses over a level window.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Per-level ratio (exponential) or exponent (power law).
    pub rate_or_alpha: f64,
}

/// Least-squares slope and residual of `y` against `x`.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let sse = pts.iter().map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    (slope, sse)
}

/// Classifies the decay of `P_l` over `l in [l_min, l_max]` by fitting
/// `ln P` against both `l` and `ln l` and keeping the better residual.
/// Levels with zero mass are skipped; fewer than three usable points is an
/// error rather than a guess.
///
/// # Panics
/// Panics unless `8 <= l_min < l_max` (shallow levels are dominated by
/// boundary effects, not by the decay law).
pub fn decay_estimate(
    family: &CodeFamily,
    l_min: u32,
    l_max: u32,
) -> Result<DecayFit, PrefixError> {
    assert!(l_min >= 8 && l_max > l_min, "fit window must satisfy 8 <= l_min < l_max");
    let stats = generation_stats(family, l_max)?;
    let mut pts_exp = Vec::new();
    let mut pts_pow = Vec::new();
    for s in &stats[l_min as usize - 1..] {
        if s.n_red.is_zero() {
            continue;
        }
        let ln_p = s.p_l.log2().expect("nonzero mass") * std::f64::consts::LN_2;
        pts_exp.push((s.level as f64, ln_p));
        pts_pow.push(((s.level as f64).ln(), ln_p));
    }
    if pts_exp.len() < 3 {
        return Err(PrefixError::DegenerateFit { found: pts_exp.len(), needed: 3 });
    }
    let (slope_exp, sse_exp) = least_squares(&pts_exp);
    let (slope_pow, sse_pow) = least_squares(&pts_pow);
    if sse_exp <= sse_pow {
        Ok(DecayFit { model: DecayModel::Exponential, rate_or_alpha: slope_exp.exp() })
    } else {
        Ok(DecayFit { model: DecayModel::PowerLaw, rate_or_alpha: -slope_pow })
    }
}

/// Deficit `1 - Z(eps)` of a mass sequence: `sum_l P_l (1 - e^{-eps l})`
/// plus `tail_mass` for all unresolved deeper words (counted as fully
/// suppressed commitment mass, an overestimate by at most
/// `tail_mass * e^{-eps l_cut}`).
pub fn deficit_series<I>(masses: I, tail_mass: f64, eps: f64) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    assert!(eps > 0.0, "the deficit needs a positive offset");
    let mut s = 0.0;
    for (l, p) in masses {
        s += p * -(-eps * l).exp_m1();
    }
    s + tail_mass
}

/// Measures the singularity exponent of the depth-calibrated family: fits
/// `ln(1 - Z)` against `ln eps` over `eps_grid` using the exact masses to
/// depth [`SINGULARITY_DEPTH`] plus the exact tail mass.  For masses
/// decaying like `l^{-alpha}` with `alpha` just above 1, the deficit scales
/// as `eps^{alpha - 1}` (up to slowly-varying corrections, which bias the
/// measured slope upward at practical grids).
///
/// Fails with [`PrefixError::SeriesTruncation`] when any grid offset is so
/// small that the unresolved tail leaves more than `1e-4` of slack.
///
/// # Panics
/// Panics unless `alpha > 1` (summable masses) and every grid offset lies
/// in `(0, 0.2]`.
pub fn power_law_singularity_check(alpha: f64, eps_grid: &[f64]) -> Result<f64, PrefixError> {
    assert!(alpha > 1.0, "mass series must be summable: alpha > 1");
    assert!(eps_grid.len() >= 2, "need at least two grid offsets");
    assert!(
        eps_grid.iter().all(|e| *e > 0.0 && *e <= 0.2),
        "grid offsets must lie in (0, 0.2]"
    );
    let stats = generation_stats(&CodeFamily::GeneralizedFibonacci, SINGULARITY_DEPTH)?;
    let last = stats.last().expect("depth >= 1");
    let tail = (&Dyadic::one() - &(&last.q_l + &last.p_l)).to_f64();
    let masses: Vec<(f64, f64)> = stats
        .iter()
        .filter(|s| !s.n_red.is_zero())
        .map(|s| (s.level as f64, s.p_l.to_f64()))
        .collect();
    let mut pts = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let spread = tail * (-eps * (SINGULARITY_DEPTH as f64 + 1.0)).exp();
        if spread > SPREAD_LIMIT {
            return Err(PrefixError::SeriesTruncation { spread, limit: SPREAD_LIMIT });
        }
        let d = deficit_series(masses.iter().copied(), tail, eps);
        pts.push((eps.ln(), d.ln()));
    }
    Ok(least_squares(&pts).0)
}
