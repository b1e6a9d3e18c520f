//! Small numeric building blocks shared across modules: compensated
//! summation and a smallest-prime-factor sieve.

use crate::error::{Error, Result};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum in, keeping both compensations.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Linear sieve holding the smallest prime factor of every integer up to a limit.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl PrimeSieve {
    /// Largest limit accepted (smallest prime factors are stored as `u32`).
    pub const MAX_LIMIT: u64 = u32::MAX as u64;

    pub fn new(limit: u64) -> Result<Self> {
        if limit > Self::MAX_LIMIT {
            return Err(Error::Size(format!("sieve limit {limit} exceeds {}", Self::MAX_LIMIT)));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(Self { spf, primes })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit() && self.spf[n as usize] as u64 == n
    }

    /// Prime factorization as `(p, k)` pairs in increasing `p`.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        debug_assert!(n >= 1 && n <= self.limit());
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        out
    }

    /// All divisors of `n` (unordered).
    pub fn divisors(&self, n: u64) -> Vec<u64> {
        let mut divs = vec![1u64];
        for (p, k) in self.factorize(n) {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..k {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs
    }
}

/// Primes `≤ limit` by a plain sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_ne!(xs.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let sieve = PrimeSieve::new(2000).unwrap();
        let trial = |n: u64| (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d)) && n >= 2;
        for n in 0..=2000u64 {
            assert_eq!(sieve.is_prime(n), trial(n), "n={n}");
        }
        assert_eq!(
            sieve.primes().iter().map(|&p| p as u64).collect::<Vec<_>>(),
            primes_up_to(2000)
        );
    }

    #[test]
    fn factorize_and_divisors() {
        let sieve = PrimeSieve::new(1000).unwrap();
        assert_eq!(sieve.factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(sieve.factorize(1).is_empty());
        let mut d = sieve.divisors(36);
        d.sort();
        assert_eq!(d, vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
    }
}
