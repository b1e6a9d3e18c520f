//! GCD sums `S_f(σ) = Σ_{a,b} f(a) f(b) gcd(a,b)^{2σ} / (ab)^σ` for
//! finitely supported nonnegative weights.
//!
//! Two evaluation routes are kept side by side:
//!
//! * naive: the double loop over the support with one gcd per pair;
//! * divisor sieve: writing `gcd^{2σ} = Σ_{d | gcd} J_{2σ}(d)` with
//!   `J_{2σ} = μ ∗ id^{2σ}` gives `S_f(σ) = Σ_d J_{2σ}(d) (Σ_{d|a} f(a) a^{-σ})²`,
//!   which costs one pass over the divisors of each support element.
//!
//! Every term in either route is nonnegative, so compensated sums keep the
//! two within a few ulps of each other.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{representation_function_with, DifferenceDomain, EnergyOptions};
use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, PrimeSieve};
use crate::sequences::IntegerSequence;

/// Quadratic-cost guard for [`gcd_sum_naive`].
pub const NAIVE_MAX_SUPPORT: usize = 20_000;
/// Default largest support element accepted by the sieve route.
pub const DEFAULT_SIEVE_LIMIT: u64 = 100_000_000;
/// Divisor buckets are kept in a flat array up to this element size.
const DENSE_BUCKET_LIMIT: u64 = 1 << 24;

/// A nonnegative weight function with finite support in `ℕ_{≥1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSupport {
    entries: Vec<(u64, f64)>,
    l1: f64,
    l2_squared: f64,
}

impl WeightedSupport {
    /// Repeated support points have their weights added.
    pub fn new(pairs: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
        for (n, w) in pairs {
            if n == 0 {
                return Err(Error::Domain("support elements must be >= 1".into()));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Domain(format!("weight {w} at {n} is not a nonnegative real")));
            }
            *merged.entry(n).or_insert(0.0) += w;
        }
        let entries: Vec<(u64, f64)> = merged.into_iter().collect();
        let l1 = entries.iter().map(|&(_, w)| w).collect::<CompensatedSum>().value();
        let l2_squared = entries.iter().map(|&(_, w)| w * w).collect::<CompensatedSum>().value();
        Ok(Self {
            entries,
            l1,
            l2_squared,
        })
    }

    /// Indicator of a set.
    pub fn indicator(support: impl IntoIterator<Item = u64>) -> Result<Self> {
        Self::new(support.into_iter().map(|n| (n, 1.0)))
    }

    /// `f = r_A` restricted to positive differences.
    pub fn from_differences(a: &IntegerSequence, opts: &EnergyOptions) -> Result<Self> {
        let r = representation_function_with(a, DifferenceDomain::PositiveDifferences, opts)?;
        Self::new(r.positive_part().into_iter().map(|(v, c)| (v, c as f64)))
    }

    /// The support scaled by `lambda`: `n ↦ λn` keeping weights.
    pub fn dilated(&self, lambda: u64) -> Result<Self> {
        let pairs = self
            .entries
            .iter()
            .map(|&(n, w)| {
                n.checked_mul(lambda)
                    .map(|m| (m, w))
                    .ok_or_else(|| Error::Size("dilated support overflows u64".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `‖f‖₁`.
    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    /// `‖f‖₂²`.
    pub fn l2_norm_squared(&self) -> f64 {
        self.l2_squared
    }

    pub fn max_element(&self) -> Option<u64> {
        self.entries.last().map(|&(n, _)| n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GcdSumMethod {
    Naive,
    DivisorSieve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GcdSumValue {
    pub sigma: f64,
    pub value: f64,
    pub method: GcdSumMethod,
    pub support_size: usize,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Domain(format!("sigma must lie in (0, 1], got {sigma}")));
    }
    Ok(())
}

/// Direct double loop; quadratic in the support size.
pub fn gcd_sum_naive(f: &WeightedSupport, sigma: f64) -> Result<GcdSumValue> {
    check_sigma(sigma)?;
    if f.len() > NAIVE_MAX_SUPPORT {
        return Err(Error::Size(format!(
            "naive GCD sum limited to {NAIVE_MAX_SUPPORT} support points, got {}",
            f.len()
        )));
    }
    let scaled: Vec<(u64, f64)> = f
        .entries()
        .iter()
        .map(|&(n, w)| (n, w * (-sigma * (n as f64).ln()).exp()))
        .collect();
    let two_sigma = 2.0 * sigma;
    let rows: Vec<CompensatedSum> = (0..scaled.len())
        .into_par_iter()
        .map(|i| {
            let (a, xa) = scaled[i];
            let mut row = CompensatedSum::new();
            row.add(f.entries()[i].1.powi(2));
            for &(b, xb) in &scaled[i + 1..] {
                let g = a.gcd(&b);
                let gp = if g == 1 {
                    1.0
                } else {
                    (two_sigma * (g as f64).ln()).exp()
                };
                row.add(2.0 * xa * xb * gp);
            }
            row
        })
        .collect();
    let mut total = CompensatedSum::new();
    for row in &rows {
        total.merge(row);
    }
    Ok(GcdSumValue {
        sigma,
        value: total.value(),
        method: GcdSumMethod::Naive,
        support_size: f.len(),
    })
}

/// `J_{2σ}(d) = d^{2σ} Π_{p | d} (1 − p^{−2σ})`.
pub fn jordan_power(sieve: &PrimeSieve, d: u64, two_sigma: f64) -> f64 {
    let mut value = (two_sigma * (d as f64).ln()).exp();
    for (p, _) in sieve.factorize(d) {
        value *= -(-two_sigma * (p as f64).ln()).exp_m1();
    }
    value
}

/// Divisor-sieve route; near-linear in `Σ τ(a)` over the support.
pub fn gcd_sum_sieve(f: &WeightedSupport, sigma: f64, sieve_limit: u64) -> Result<GcdSumValue> {
    check_sigma(sigma)?;
    let max = f.max_element().unwrap_or(1);
    if max > sieve_limit {
        return Err(Error::SieveLimit {
            max,
            limit: sieve_limit,
        });
    }
    let sieve = PrimeSieve::new(max)?;
    gcd_sum_sieve_using(f, sigma, &sieve)
}

/// As [`gcd_sum_sieve`], reusing a prebuilt sieve covering the support.
pub fn gcd_sum_sieve_using(f: &WeightedSupport, sigma: f64, sieve: &PrimeSieve) -> Result<GcdSumValue> {
    check_sigma(sigma)?;
    let max = f.max_element().unwrap_or(1);
    if max > sieve.limit() {
        return Err(Error::SieveLimit {
            max,
            limit: sieve.limit(),
        });
    }
    let two_sigma = 2.0 * sigma;
    let scaled = f
        .entries()
        .iter()
        .map(|&(n, w)| (n, w * (-sigma * (n as f64).ln()).exp()));

    let mut total = CompensatedSum::new();
    if max <= DENSE_BUCKET_LIMIT {
        let mut buckets = vec![0.0f64; max as usize + 1];
        for (n, x) in scaled {
            for d in sieve.divisors(n) {
                buckets[d as usize] += x;
            }
        }
        for (d, &g) in buckets.iter().enumerate().skip(1) {
            if g != 0.0 {
                total.add(jordan_power(sieve, d as u64, two_sigma) * g * g);
            }
        }
    } else {
        let mut buckets: HashMap<u64, f64> = HashMap::new();
        for (n, x) in scaled {
            for d in sieve.divisors(n) {
                *buckets.entry(d).or_insert(0.0) += x;
            }
        }
        let mut keys: Vec<u64> = buckets.keys().copied().collect();
        keys.sort_unstable();
        for d in keys {
            let g = buckets[&d];
            total.add(jordan_power(sieve, d, two_sigma) * g * g);
        }
    }
    Ok(GcdSumValue {
        sigma,
        value: total.value(),
        method: GcdSumMethod::DivisorSieve,
        support_size: f.len(),
    })
}

/// `Σ_{n_i, n_j ∈ A−A, n_i, n_j > 0} r(n_i) r(n_j) gcd(n_i,n_j)^{2σ} / (n_i n_j)^σ`.
///
/// Uses the sieve route when the largest difference is within
/// `sieve_limit`, otherwise the naive route.
pub fn difference_set_gcd_sum(
    a: &IntegerSequence,
    sigma: f64,
    sieve_limit: u64,
    opts: &EnergyOptions,
) -> Result<GcdSumValue> {
    let f = WeightedSupport::from_differences(a, opts)?;
    match f.max_element() {
        Some(max) if max > sieve_limit => gcd_sum_naive(&f, sigma),
        _ => gcd_sum_sieve(&f, sigma, sieve_limit),
    }
}
