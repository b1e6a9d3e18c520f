//! Pair correlation `R₂(s, α, N)` and its variance over α.

use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::pointset::{circle_distance_turns, frac_parts, sample_alpha_at, PointSet, DEFAULT_ALPHA_BITS};
use crate::sequences::{max_bits, IntegerSequence};

/// Quadratic-cost guard for [`pair_correlation_brute`].
pub const BRUTE_FORCE_MAX_POINTS: usize = 20_000;

const HALF_TURN: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCorrelationResult {
    pub s: f64,
    pub n: usize,
    /// Ordered pairs `(n, m)`, `n ≠ m`, with `‖x_n − x_m‖ ≤ s/N`.
    pub pair_count: u64,
    /// `pair_count / N`.
    pub value: f64,
    /// Pairs whose distance lies within the combined point error of the
    /// threshold. They are included in `pair_count`.
    pub boundary_pairs: u64,
}

impl PairCorrelationResult {
    fn new(s: f64, n: usize, pair_count: u64, boundary_pairs: u64) -> Self {
        Self {
            s,
            n,
            pair_count,
            value: pair_count as f64 / n as f64,
            boundary_pairs,
        }
    }
}

/// `floor(s · 2^64 / n)` computed exactly, or `None` when `s/n > 1/2`
/// (every pair is within the threshold).
pub fn threshold_turns(s: f64, n: usize) -> Option<u64> {
    debug_assert!(s > 0.0 && n > 0);
    if 2.0 * s > n as f64 {
        return None;
    }
    let (mantissa, exponent, _) = Float::integer_decode(s);
    let n = n as u128;
    let shift = exponent as i32 + 64;
    let t = if shift >= 0 {
        ((mantissa as u128) << shift) / n
    } else if -shift >= 64 {
        0
    } else {
        mantissa as u128 / (n << (-shift))
    };
    Some(t.min(HALF_TURN as u128) as u64)
}

struct Window {
    /// Inclusive upper edge for "counted in"; `None` means everything.
    upper: Option<u64>,
    /// Distances `< lower` are unambiguous interior pairs.
    lower: Option<u64>,
}

fn window(pts: &PointSet, s: f64) -> Result<Window> {
    if pts.is_empty() {
        return Err(Error::Domain("pair correlation of an empty point set".into()));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("s must be positive and finite, got {s}")));
    }
    let n = pts.len();
    if s / n as f64 <= 2.0 * pts.error_bound() {
        return Err(Error::Precision(format!(
            "threshold s/N = {:e} does not exceed twice the point error {:e}",
            s / n as f64,
            pts.error_bound()
        )));
    }
    let slack = 2 * pts.error_turns();
    let thr = threshold_turns(s, n);
    let upper = thr.and_then(|t| t.checked_add(slack).filter(|&u| u < HALF_TURN));
    let lower = thr.map(|t| t.saturating_sub(slack));
    Ok(Window { upper, lower })
}

/// Ordered pairs with circle distance `≤ w` (`None`: all pairs), via a
/// two-pointer sweep over the sorted points unwrapped once around the circle.
fn count_within(sorted: &[u64], w: Option<u64>) -> u64 {
    let n = sorted.len() as u64;
    let Some(w) = w else {
        return n * n.saturating_sub(1);
    };
    if w >= HALF_TURN {
        return n * n.saturating_sub(1);
    }
    let len = sorted.len();
    let unwrapped = |k: usize| -> u128 {
        if k < len {
            sorted[k] as u128
        } else {
            sorted[k - len] as u128 + (1u128 << 64)
        }
    };
    // Each unordered pair is met exactly once: either going forward inside
    // the sorted array, or across the wrap. w < 1/2 keeps the two disjoint.
    let mut unordered = 0u64;
    let mut end = 0usize;
    for (i, &x) in sorted.iter().enumerate() {
        let base = x as u128;
        if end < i {
            end = i;
        }
        while end + 1 < i + len && unwrapped(end + 1) - base <= w as u128 {
            end += 1;
        }
        unordered += (end - i) as u64;
    }
    2 * unordered
}

/// `R₂(s)` via sorting and a sliding window; `O(N log N)`.
pub fn pair_correlation(pts: &PointSet, s: f64) -> Result<PairCorrelationResult> {
    let win = window(pts, s)?;
    let mut sorted = pts.turns().to_vec();
    sorted.sort_unstable();
    let inside = count_within(&sorted, win.upper);
    let interior = match win.lower {
        Some(0) => 0,
        Some(l) => count_within(&sorted, Some(l - 1)),
        None => inside,
    };
    Ok(PairCorrelationResult::new(s, pts.len(), inside, inside - interior))
}

/// Direct double loop over all pairs; the oracle for [`pair_correlation`].
pub fn pair_correlation_brute(pts: &PointSet, s: f64) -> Result<PairCorrelationResult> {
    if pts.len() > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::Size(format!(
            "brute-force pair correlation limited to {BRUTE_FORCE_MAX_POINTS} points, got {}",
            pts.len()
        )));
    }
    let win = window(pts, s)?;
    let x = pts.turns();
    let (mut inside, mut boundary) = (0u64, 0u64);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let d = circle_distance_turns(x[i], x[j]);
            if win.upper.is_none_or(|u| d <= u) {
                inside += 2;
                if win.lower.is_some_and(|l| d >= l) {
                    boundary += 2;
                }
            }
        }
    }
    Ok(PairCorrelationResult::new(s, pts.len(), inside, boundary))
}

/// The lattice `{j/N : 0 ≤ j < N}` on the turn grid.
pub fn lattice_points(n: usize) -> Result<PointSet> {
    let turns = (0..n as u128).map(|j| ((j << 64) / n as u128) as u64).collect();
    let exact = n.is_power_of_two();
    PointSet::from_turns(turns, if exact { 0 } else { 1 }, format!("lattice(N={n})"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub s: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Mean of `R₂(s, α, N)` over the α samples.
    pub mean: f64,
    /// Mean of `(R₂ − target)²` over the α samples.
    pub variance: f64,
    /// `2s(N−1)/N`.
    pub target: f64,
    /// Largest boundary-pair count seen in any sample.
    pub max_boundary_pairs: u64,
}

pub fn poisson_target(s: f64, n: usize) -> f64 {
    2.0 * s * (n as f64 - 1.0) / n as f64
}

/// Fractional bits needed for α so that `frac_parts` accepts `seq`.
pub fn alpha_bits_for(seq: &IntegerSequence) -> u32 {
    let need = (max_bits(seq) + 64).div_ceil(64) * 64;
    (need as u32).max(DEFAULT_ALPHA_BITS)
}

/// Monte Carlo estimate of `∫₀¹ (R₂(s,α,N) − 2s(N−1)/N)² dα` from `m`
/// samples of α.
pub fn variance_over_alpha(seq: &IntegerSequence, s: f64, m: usize, seed: u64) -> Result<VarianceEstimate> {
    variance_over_alpha_with_bits(seq, s, m, seed, alpha_bits_for(seq))
}

pub fn variance_over_alpha_with_bits(
    seq: &IntegerSequence,
    s: f64,
    m: usize,
    seed: u64,
    frac_bits: u32,
) -> Result<VarianceEstimate> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "variance needs at least 2 alpha samples, got {m}"
        )));
    }
    let n = seq.len();
    let per_sample = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let alpha = sample_alpha_at(seed, i, frac_bits)?;
            pair_correlation(&frac_parts(seq, &alpha)?, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let target = poisson_target(s, n);
    let mean = compensated_sum(per_sample.iter().map(|r| r.value)) / m as f64;
    let variance = compensated_sum(per_sample.iter().map(|r| (r.value - target).powi(2))) / m as f64;
    Ok(VarianceEstimate {
        s,
        n,
        samples: m,
        seed,
        mean,
        variance,
        target,
        max_boundary_pairs: per_sample.iter().map(|r| r.boundary_pairs).max().unwrap_or(0),
    })
}

/// One row per prefix length: how `R₂` concentrates around `2s`.
pub fn ppc_convergence_report(
    seq: &IntegerSequence,
    s: f64,
    n_grid: &[usize],
    m: usize,
    seed: u64,
) -> Result<Vec<VarianceEstimate>> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("N grid must be nonempty and strictly increasing".into()));
    }
    n_grid
        .iter()
        .map(|&n| variance_over_alpha(&seq.prefix(n)?, s, m, seed))
        .collect()
}
