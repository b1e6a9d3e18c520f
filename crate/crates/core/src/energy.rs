//! Representation functions and additive energy.
//!
//! `r_A(v) = #{(a, b) ∈ A² : a − b = v}` and `E(A) = Σ_v r_A(v)²`, which equals
//! the number of quadruples with `a + b = c + d`. Every count is exact.

use std::collections::HashMap;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequences::IntegerSequence;

/// Default cap on `|A|²`.
pub const DEFAULT_PAIR_BUDGET: u64 = 400_000_000;
/// Spans up to this size are counted in a flat array instead of sorted runs.
pub const DENSE_SPAN_LIMIT: u64 = 1 << 26;
/// The FFT cross-check only runs on sets with `max(A) ≤ 2^27`.
pub const FFT_MAX_ELEMENT: u64 = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyOptions {
    /// SizeError when `|A|²` (or `|supp f|²`) exceeds this.
    pub pair_budget: u64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            pair_budget: DEFAULT_PAIR_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceDomain {
    /// All `v ∈ ℤ`.
    Differences,
    /// Only `v > 0`.
    PositiveDifferences,
}

/// Finite map `v → r(v)`, sorted by `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationWeights {
    entries: Vec<(i128, u64)>,
    domain: DifferenceDomain,
}

impl RepresentationWeights {
    pub fn domain(&self) -> DifferenceDomain {
        self.domain
    }

    pub fn entries(&self) -> &[(i128, u64)] {
        &self.entries
    }

    pub fn get(&self, v: i128) -> u64 {
        self.entries
            .binary_search_by_key(&v, |&(k, _)| k)
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// `Σ_v r(v)`.
    pub fn total(&self) -> u128 {
        self.entries.iter().map(|&(_, c)| c as u128).sum()
    }

    /// `Σ_v r(v)²`.
    pub fn sum_of_squares(&self) -> u128 {
        self.entries.iter().map(|&(_, c)| (c as u128).pow(2)).sum()
    }

    /// Positive support as `(n, r(n))` with `n ≥ 1`.
    pub fn positive_part(&self) -> Vec<(u64, u64)> {
        self.entries
            .iter()
            .filter(|&&(v, _)| v > 0)
            .map(|&(v, c)| (v as u64, c))
            .collect()
    }
}

fn small_terms(a: &IntegerSequence) -> Result<&[u64]> {
    a.as_u64()
        .ok_or_else(|| Error::Size("energy computations need terms below 2^64".into()))
}

fn check_pairs(n: usize, opts: &EnergyOptions) -> Result<()> {
    let pairs = (n as u128).pow(2);
    if pairs > opts.pair_budget as u128 {
        return Err(Error::Size(format!(
            "|A|^2 = {pairs} exceeds the pair budget {}",
            opts.pair_budget
        )));
    }
    Ok(())
}

/// Run-length counts of the positive differences `a_j − a_i`, `i < j`.
fn positive_difference_counts(terms: &[u64]) -> Vec<(u64, u64)> {
    let mut diffs: Vec<u64> = terms
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &ai)| terms[i + 1..].iter().map(move |&aj| aj - ai))
        .collect();
    diffs.par_sort_unstable();
    let mut out: Vec<(u64, u64)> = Vec::new();
    for d in diffs {
        match out.last_mut() {
            Some((v, c)) if *v == d => *c += 1,
            _ => out.push((d, 1)),
        }
    }
    out
}

pub fn representation_function(a: &IntegerSequence, domain: DifferenceDomain) -> Result<RepresentationWeights> {
    representation_function_with(a, domain, &EnergyOptions::default())
}

pub fn representation_function_with(
    a: &IntegerSequence,
    domain: DifferenceDomain,
    opts: &EnergyOptions,
) -> Result<RepresentationWeights> {
    let terms = small_terms(a)?;
    check_pairs(terms.len(), opts)?;
    let positive = positive_difference_counts(terms);
    let entries = match domain {
        DifferenceDomain::PositiveDifferences => positive.into_iter().map(|(v, c)| (v as i128, c)).collect(),
        DifferenceDomain::Differences => {
            let mut e: Vec<(i128, u64)> = positive.iter().rev().map(|&(v, c)| (-(v as i128), c)).collect();
            if !terms.is_empty() {
                e.push((0, terms.len() as u64));
            }
            e.extend(positive.iter().map(|&(v, c)| (v as i128, c)));
            e
        }
    };
    Ok(RepresentationWeights { entries, domain })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMethod {
    DenseDifferences,
    SortedDifferences,
    SumHashing,
    Fft,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub n: usize,
    pub energy: u128,
    /// `N²`.
    pub lower: u128,
    /// `N³`.
    pub upper: u128,
    pub method: EnergyMethod,
}

impl EnergyReport {
    fn new(n: usize, energy: u128, method: EnergyMethod) -> Self {
        let n128 = n as u128;
        Self {
            n,
            energy,
            lower: n128 * n128,
            upper: n128 * n128 * n128,
            method,
        }
    }

    /// `E · (log N)^C / N³`; above 1 the hypothesis `E ≤ N³/(log N)^C` fails.
    pub fn normalized(&self, c: f64) -> f64 {
        let n = self.n as f64;
        self.energy as f64 * n.ln().powf(c) / n.powi(3)
    }
}

/// `E(A) = Σ_v r(v)²` from difference counts.
pub fn additive_energy(a: &IntegerSequence) -> Result<EnergyReport> {
    additive_energy_with(a, &EnergyOptions::default())
}

pub fn additive_energy_with(a: &IntegerSequence, opts: &EnergyOptions) -> Result<EnergyReport> {
    let terms = small_terms(a)?;
    check_pairs(terms.len(), opts)?;
    let n = terms.len();
    if n == 0 {
        return Ok(EnergyReport::new(0, 0, EnergyMethod::SortedDifferences));
    }
    let span = terms[n - 1] - terms[0];
    let diagonal = (n as u128).pow(2);
    if span < DENSE_SPAN_LIMIT {
        let mut counts = vec![0u32; span as usize + 1];
        for (i, &ai) in terms.iter().enumerate() {
            for &aj in &terms[i + 1..] {
                counts[(aj - ai) as usize] += 1;
            }
        }
        let off: u128 = counts.iter().map(|&c| (c as u128).pow(2)).sum();
        Ok(EnergyReport::new(n, diagonal + 2 * off, EnergyMethod::DenseDifferences))
    } else {
        let off: u128 = positive_difference_counts(terms)
            .iter()
            .map(|&(_, c)| (c as u128).pow(2))
            .sum();
        Ok(EnergyReport::new(
            n,
            diagonal + 2 * off,
            EnergyMethod::SortedDifferences,
        ))
    }
}

/// `#{a + b = c + d}` by hashing ordered-pair sums; independent of the
/// difference route.
pub fn additive_energy_by_sums(a: &IntegerSequence) -> Result<EnergyReport> {
    let terms = small_terms(a)?;
    check_pairs(terms.len(), &EnergyOptions::default())?;
    let mut sums: HashMap<u128, u64> = HashMap::new();
    for &x in terms {
        for &y in terms {
            *sums.entry(x as u128 + y as u128).or_insert(0) += 1;
        }
    }
    let energy = sums.values().map(|&c| (c as u128).pow(2)).sum();
    Ok(EnergyReport::new(terms.len(), energy, EnergyMethod::SumHashing))
}

/// `E(A)` from the autocorrelation of the indicator of `A`, via FFT.
pub fn additive_energy_fft(a: &IntegerSequence) -> Result<EnergyReport> {
    let terms = small_terms(a)?;
    let n = terms.len();
    if n == 0 {
        return Ok(EnergyReport::new(0, 0, EnergyMethod::Fft));
    }
    let max = terms[n - 1];
    if max > FFT_MAX_ELEMENT {
        return Err(Error::Size(format!("FFT energy path needs max(A) <= 2^27, got {max}")));
    }
    let base = terms[0];
    let span = (max - base) as usize;
    let len = (2 * span + 1).next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for &t in terms {
        buf[(t - base) as usize].re = 1.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = len as f64;
    let energy = buf
        .iter()
        .map(|z| {
            let r = (z.re / scale).round() as u128;
            r * r
        })
        .sum();
    Ok(EnergyReport::new(n, energy, EnergyMethod::Fft))
}

/// `Σ_{ab=cd} f(a)f(b)f(c)f(d)` for positive-difference weights, by hashing
/// products `ab → Σ f(a)f(b)` and summing the squares.
pub fn fourth_moment_multiplicative(f: &RepresentationWeights) -> Result<u128> {
    fourth_moment_multiplicative_with(f, &EnergyOptions::default())
}

pub fn fourth_moment_multiplicative_with(f: &RepresentationWeights, opts: &EnergyOptions) -> Result<u128> {
    if f.domain() != DifferenceDomain::PositiveDifferences {
        return Err(Error::Domain(
            "multiplicative fourth moment is defined on positive differences".into(),
        ));
    }
    let support = f.positive_part();
    check_pairs(support.len(), opts)?;
    let mut products: HashMap<u128, u128> = HashMap::new();
    for &(a, fa) in &support {
        for &(b, fb) in &support {
            *products.entry(a as u128 * b as u128).or_insert(0) += fa as u128 * fb as u128;
        }
    }
    Ok(products.values().map(|&w| w * w).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    pub n: usize,
    pub energy: u128,
    /// `E · (log N)^C / N³`.
    pub ratio: f64,
    /// `ratio > 1`: the bound `E ≤ N³/(log N)^C` fails at this `N`.
    pub exceeds_bound: bool,
}

/// Energies of the prefixes `A_N` for each `N` in `n_grid`.
pub fn energy_growth_profile(seq: &IntegerSequence, n_grid: &[usize], c: f64) -> Result<Vec<EnergyRow>> {
    energy_growth_profile_with(seq, n_grid, c, &EnergyOptions::default())
}

pub fn energy_growth_profile_with(
    seq: &IntegerSequence,
    n_grid: &[usize],
    c: f64,
    opts: &EnergyOptions,
) -> Result<Vec<EnergyRow>> {
    n_grid
        .iter()
        .map(|&n| {
            let report = additive_energy_with(&seq.prefix(n)?, opts)?;
            let ratio = report.normalized(c);
            Ok(EnergyRow {
                n,
                energy: report.energy,
                ratio,
                exceeds_bound: ratio > 1.0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u64]) -> IntegerSequence {
        IntegerSequence::from_u64(xs.to_vec(), "t").unwrap()
    }

    #[test]
    fn representation_small() {
        let r = representation_function(&set(&[1, 2, 3]), DifferenceDomain::Differences).unwrap();
        assert_eq!(r.get(0), 3);
        assert_eq!((r.get(1), r.get(-1)), (2, 2));
        assert_eq!((r.get(2), r.get(-2)), (1, 1));
        assert_eq!(r.total(), 9);

        let r = representation_function(&set(&[5]), DifferenceDomain::Differences).unwrap();
        assert_eq!(r.entries(), &[(0, 1)]);

        let r = representation_function(&set(&[1, 2, 4, 8]), DifferenceDomain::PositiveDifferences).unwrap();
        assert_eq!(r.entries(), &[(1, 1), (2, 1), (3, 1), (4, 1), (6, 1), (7, 1)]);
    }

    #[test]
    fn energy_examples() {
        assert_eq!(additive_energy(&set(&[1, 2, 3])).unwrap().energy, 19);
        assert_eq!(additive_energy(&set(&[42])).unwrap().energy, 1);
        assert_eq!(additive_energy(&set(&[1, 2, 4, 8])).unwrap().energy, 28);
    }

    #[test]
    fn sparse_path_matches_dense() {
        let s = set(&[1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 1 << 40]);
        let sparse = additive_energy(&s).unwrap();
        assert_eq!(sparse.method, EnergyMethod::SortedDifferences);
        assert_eq!(sparse.energy, additive_energy_by_sums(&s).unwrap().energy);
    }

    #[test]
    fn fft_matches() {
        let s = crate::sequences::gen_power(2, 60).unwrap();
        assert_eq!(
            additive_energy_fft(&s).unwrap().energy,
            additive_energy(&s).unwrap().energy
        );
        assert!(additive_energy_fft(&set(&[1, FFT_MAX_ELEMENT + 1])).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let s = crate::sequences::gen_power(1, 100).unwrap();
        let tight = EnergyOptions { pair_budget: 9_999 };
        assert!(matches!(additive_energy_with(&s, &tight), Err(Error::Size(_))));
        assert!(representation_function_with(&s, DifferenceDomain::Differences, &tight).is_err());
    }

    #[test]
    fn fourth_moment_examples() {
        let f = |xs: &[u64]| representation_function(&set(xs), DifferenceDomain::PositiveDifferences).unwrap();
        assert_eq!(fourth_moment_multiplicative(&f(&[1, 2])).unwrap(), 1);
        assert_eq!(fourth_moment_multiplicative(&f(&[1, 2, 3])).unwrap(), 33);
        assert_eq!(fourth_moment_multiplicative(&f(&[7])).unwrap(), 0);
        let full = representation_function(&set(&[1, 2]), DifferenceDomain::Differences).unwrap();
        assert!(fourth_moment_multiplicative(&full).is_err());
    }

    #[test]
    fn growth_profile_flags() {
        let s = crate::sequences::gen_power(1, 200).unwrap();
        let rows = energy_growth_profile(&s, &[100, 200], 0.0).unwrap();
        // (2N^3 + N) / 3N^3
        for row in &rows {
            let n = row.n as f64;
            assert!((row.ratio - (2.0 * n.powi(3) + n) / (3.0 * n.powi(3))).abs() < 1e-12);
            assert!(!row.exceeds_bound);
        }
        let rows = energy_growth_profile(&s, &[200], 1.0).unwrap();
        assert!(rows[0].exceeds_bound);
    }
}
