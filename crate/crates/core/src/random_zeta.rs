//! Random Euler products with circle-valued weights.
//!
//! `X(p)` are independent and uniform on the unit circle, `X(n) = Π X(p)^k`
//! over `p^k ‖ n`, and `ζ_{X,P}(σ) = Π_{p ≤ P} (1 − X(p) p^{−σ})^{−1}`.
//!
//! Everything here is finite: products stop at the prime limit `P` and the
//! identities are stated for `P`-smooth supports, where truncation is exact.
//! For such `f`, expanding both factors and pairing `X(m)` with `X(n)` gives
//!
//! ```text
//! E|D(X) ζ_{X,P}(σ)|² = ζ_P(2σ) · S_f(σ),   ζ_P(s) = Π_{p ≤ P} (1 − p^{−s})^{−1},
//! ```
//!
//! since `am = bn` over `P`-smooth `m, n` forces `m = (b/g)k`, `n = (a/g)k`
//! with `g = gcd(a, b)` and `k` ranging over `P`-smooth integers.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::beta;
use crate::error::{Error, Result};
use crate::gcd_sums::{gcd_sum_naive, WeightedSupport};
use crate::numeric::{compensated_sum, primes_up_to, CompensatedSum};
use crate::stream::{Domain, Substream};

/// Relative agreement demanded between quadrature and series.
pub const MOMENT_CROSS_CHECK_RTOL: f64 = 1e-10;
const QUADRATURE_RTOL: f64 = 1e-14;
const QUADRATURE_MAX_NODES: usize = 1 << 18;
const SERIES_MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomZetaConfig {
    pub sigma: f64,
    pub prime_limit: u64,
    pub l: u32,
    pub samples: usize,
    pub seed: u64,
}

impl RandomZetaConfig {
    /// Checks `1/2 < σ < 3/4`, `P ≥ 2` and `l ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.5 && self.sigma < 0.75) {
            return Err(Error::Domain(format!(
                "sigma must lie in (1/2, 3/4), got {}",
                self.sigma
            )));
        }
        if self.prime_limit < 2 {
            return Err(Error::Domain("prime limit must be at least 2".into()));
        }
        if self.l == 0 {
            return Err(Error::Domain("l must be at least 1".into()));
        }
        Ok(())
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn integrand(r: f64, l: u32, theta: f64) -> f64 {
    (1.0 + r * r - 2.0 * r * theta.cos()).recip().powi(l as i32)
}

/// `(1/2π) ∫₀^{2π} (1 + r² − 2r cos θ)^{−l} dθ` by the trapezoidal rule,
/// doubling the node count until successive values agree.
pub fn circle_moment_quadrature(r: f64, l: u32) -> Result<f64> {
    // The integrand is even in θ, so integrate over [0, π].
    let mut n = 16usize;
    let h = std::f64::consts::PI / n as f64;
    let mut sum = 0.5 * (integrand(r, l, 0.0) + integrand(r, l, std::f64::consts::PI));
    sum += (1..n).map(|k| integrand(r, l, k as f64 * h)).sum::<f64>();
    let mut estimate = sum / n as f64;
    while n < QUADRATURE_MAX_NODES {
        let h = std::f64::consts::PI / (2 * n) as f64;
        // New nodes are the odd multiples of the halved step.
        sum += compensated_sum((0..n).map(|k| integrand(r, l, (2 * k + 1) as f64 * h)));
        n *= 2;
        let refined = sum / n as f64;
        if (refined - estimate).abs() <= QUADRATURE_RTOL * refined {
            return Ok(refined);
        }
        estimate = refined;
    }
    Err(Error::Quadrature(format!(
        "trapezoidal rule did not settle for r={r}, l={l} within {QUADRATURE_MAX_NODES} nodes"
    )))
}

/// `Σ_{k≥0} C(l+k−1, k)² r^{2k}`.
pub fn circle_moment_series(r: f64, l: u32) -> Result<f64> {
    let r2 = r * r;
    let mut coeff = 1.0f64; // C(l+k-1, k)
    let mut power = 1.0f64; // r^{2k}
    let mut sum = CompensatedSum::new();
    sum.add(1.0);
    let mut previous = 1.0f64;
    for k in 1..SERIES_MAX_TERMS {
        coeff *= (l as f64 + k as f64 - 1.0) / k as f64;
        power *= r2;
        let term = coeff * coeff * power;
        sum.add(term);
        if term < previous && term <= 1e-18 * sum.value() {
            return Ok(sum.value());
        }
        previous = term;
    }
    Err(Error::Series(format!(
        "moment series did not converge for r={r}, l={l}"
    )))
}

/// `E_l(p) = E|1 − X(p) p^{−σ}|^{−2l}`, by quadrature, cross-checked
/// against the binomial series.
pub fn per_prime_moment(p: u64, sigma: f64, l: u32) -> Result<f64> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    per_prime_moment_unchecked(p, sigma, l)
}

fn per_prime_moment_unchecked(p: u64, sigma: f64, l: u32) -> Result<f64> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma must lie in (1/2, 1), got {sigma}")));
    }
    if l == 0 {
        return Err(Error::Domain("l must be at least 1".into()));
    }
    let r = (-sigma * (p as f64).ln()).exp();
    let quad = circle_moment_quadrature(r, l)?;
    let series = circle_moment_series(r, l)?;
    if (quad - series).abs() > MOMENT_CROSS_CHECK_RTOL * series {
        return Err(Error::Quadrature(format!(
            "quadrature {quad} and series {series} disagree for p={p}, sigma={sigma}, l={l}"
        )));
    }
    Ok(quad)
}

/// `log Π_{p ≤ P} E_l(p)`.
pub fn exact_truncated_moment(cfg: &RandomZetaConfig) -> Result<f64> {
    cfg.validate()?;
    let logs = primes_up_to(cfg.prime_limit)
        .par_iter()
        .map(|&p| per_prime_moment_unchecked(p, cfg.sigma, cfg.l).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    Ok(compensated_sum(logs))
}

/// `ζ_P(s) = Π_{p ≤ P} (1 − p^{−s})^{−1}`.
pub fn truncated_zeta(s: f64, prime_limit: u64) -> f64 {
    let log = compensated_sum(
        primes_up_to(prime_limit)
            .into_iter()
            .map(|p| -(-(-s * (p as f64).ln()).exp()).ln_1p()),
    );
    log.exp()
}

/// `(l² + βl) · log((σ − 1/2)^{−1})`.
pub fn moment_lemma_rhs(l: u32, sigma: f64) -> f64 {
    let l = l as f64;
    (l * l + beta() * l) * (1.0 / (sigma - 0.5)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBoundCheck {
    pub l: u32,
    pub sigma: f64,
    pub prime_limit: u64,
    /// `Σ_{p ≤ P} log E_l(p)`.
    pub exact_log: f64,
    /// `(l² + βl) log((σ − 1/2)^{−1})`.
    pub bound: f64,
    pub pass: bool,
}

/// The truncated `2l`-th moment against the moment-lemma bound.
pub fn moment_bound_check(l: u32, sigma: f64, prime_limit: u64) -> Result<MomentBoundCheck> {
    let cfg = RandomZetaConfig {
        sigma,
        prime_limit,
        l,
        samples: 0,
        seed: 0,
    };
    let exact_log = exact_truncated_moment(&cfg)?;
    let bound = moment_lemma_rhs(l, sigma);
    Ok(MomentBoundCheck {
        l,
        sigma,
        prime_limit,
        exact_log,
        bound,
        pass: exact_log <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerPrimeBoundCheck {
    pub l: u32,
    pub sigma: f64,
    pub prime_limit: u64,
    /// Smallest `bound − log E_l(p)` over the primes.
    pub min_margin: f64,
    pub worst_prime: u64,
    pub pass: bool,
}

/// Per-prime bounds: `log E_l(2) ≤ 5.12 l / 2^{2σ}` and, for `p ≥ 3`,
/// `log E_l(p) ≤ (l² + βl) / p^{2σ}`.
pub fn per_prime_bound_check(l: u32, sigma: f64, prime_limit: u64) -> Result<PerPrimeBoundCheck> {
    let lf = l as f64;
    let b = beta();
    let margins = primes_up_to(prime_limit)
        .par_iter()
        .map(|&p| {
            let log_e = per_prime_moment_unchecked(p, sigma, l)?.ln();
            let scale = (-2.0 * sigma * (p as f64).ln()).exp();
            let bound = if p == 2 {
                5.12 * lf * scale
            } else {
                (lf * lf + b * lf) * scale
            };
            Ok((p, bound - log_e))
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst_prime, min_margin) = margins
        .into_iter()
        .fold((0, f64::INFINITY), |acc, (p, m)| if m < acc.1 { (p, m) } else { acc });
    Ok(PerPrimeBoundCheck {
        l,
        sigma,
        prime_limit,
        min_margin,
        worst_prime,
        pass: min_margin >= 0.0,
    })
}

/// One draw of the random model: an angle per prime and `ζ_{X,P}(σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaSample {
    pub index: u64,
    /// `θ_p` for each prime `p ≤ P`, in increasing `p`.
    pub angles: Vec<f64>,
    pub zeta: Complex64,
}

/// Draws reproducible samples of `ζ_{X,P}(σ)`. Sample `i` reads its angles
/// from substream `(seed, i)`; the angle of the `k`-th prime is draw `k`.
#[derive(Debug, Clone)]
pub struct ZetaSampler {
    sigma: f64,
    seed: u64,
    primes: Vec<u64>,
    /// `p^{−σ}` per prime.
    radii: Vec<f64>,
}

impl ZetaSampler {
    pub fn new(sigma: f64, prime_limit: u64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if prime_limit < 2 {
            return Err(Error::Domain("prime limit must be at least 2".into()));
        }
        let primes = primes_up_to(prime_limit);
        let radii = primes.iter().map(|&p| (-sigma * (p as f64).ln()).exp()).collect();
        Ok(Self {
            sigma,
            seed,
            primes,
            radii,
        })
    }

    pub fn from_config(cfg: &RandomZetaConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(cfg.sigma, cfg.prime_limit, cfg.seed)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn prime_limit(&self) -> u64 {
        *self.primes.last().expect("at least one prime")
    }

    pub fn sample(&self, index: u64) -> ZetaSample {
        let mut stream = Substream::new(self.seed, Domain::CircleAngles, index);
        let angles: Vec<f64> = self.primes.iter().map(|_| stream.next_angle()).collect();
        let mut zeta = Complex64::new(1.0, 0.0);
        for (&theta, &r) in angles.iter().zip(&self.radii) {
            zeta /= Complex64::new(1.0, 0.0) - Complex64::from_polar(r, theta);
        }
        ZetaSample { index, angles, zeta }
    }

    /// Samples `0..count` in index order.
    pub fn samples(&self, count: usize) -> impl Iterator<Item = ZetaSample> + '_ {
        (0..count as u64).map(move |i| self.sample(i))
    }
}

/// Support elements factored over the sampler's primes, ready for
/// evaluating `D(X) = Σ f(a) X(a)`.
#[derive(Debug, Clone)]
pub struct SmoothSupport {
    /// `(weight, [(prime index, exponent)])` per support element.
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl SmoothSupport {
    pub fn new(f: &WeightedSupport, primes: &[u64]) -> Result<Self> {
        let prime_limit = primes.last().copied().unwrap_or(1);
        let terms = f
            .entries()
            .iter()
            .map(|&(a, w)| {
                let mut rest = a;
                let mut exps = Vec::new();
                for (idx, &p) in primes.iter().enumerate() {
                    if rest == 1 {
                        break;
                    }
                    let mut k = 0;
                    while rest % p == 0 {
                        rest /= p;
                        k += 1;
                    }
                    if k > 0 {
                        exps.push((idx, k));
                    }
                }
                if rest > 1 {
                    let factor = (2..)
                        .take_while(|d| d * d <= rest)
                        .find(|d| rest % d == 0)
                        .unwrap_or(rest);
                    return Err(Error::Smoothness {
                        element: a,
                        factor,
                        prime_limit,
                    });
                }
                Ok((w, exps))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }

    /// `D(X)` for the angles of one sample.
    pub fn evaluate(&self, angles: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, exps) in &self.terms {
            let phase: f64 = exps.iter().map(|&(i, k)| k as f64 * angles[i]).sum();
            acc += Complex64::from_polar(*w, phase);
        }
        acc
    }
}

/// `D(X) = Σ_a f(a) X(a)` for one sample.
pub fn dirichlet_weight_sum(f: &WeightedSupport, sampler: &ZetaSampler, sample: &ZetaSample) -> Result<Complex64> {
    Ok(SmoothSupport::new(f, sampler.primes())?.evaluate(&sample.angles))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McComparison {
    pub samples: usize,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub exact: f64,
    /// `(mc_mean − exact) / mc_stderr`, or 0 when both sides agree exactly.
    pub z_score: f64,
}

fn compare(values: &[f64], exact: f64) -> McComparison {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0).max(1.0);
    let stderr = (var / n).sqrt();
    let diff = mean - exact;
    let z_score = if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    McComparison {
        samples: values.len(),
        mc_mean: mean,
        mc_stderr: stderr,
        exact,
        z_score,
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
    }
    Ok(())
}

/// Monte Carlo `E|D(X) ζ_{X,P}(σ)|²` against `ζ_P(2σ) S_f(σ)`.
pub fn identity_check(
    f: &WeightedSupport,
    sigma: f64,
    prime_limit: u64,
    samples: usize,
    seed: u64,
) -> Result<McComparison> {
    check_samples(samples)?;
    let sampler = ZetaSampler::new(sigma, prime_limit, seed)?;
    let support = SmoothSupport::new(f, sampler.primes())?;
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = sampler.sample(i);
            (support.evaluate(&s.angles) * s.zeta).norm_sqr()
        })
        .collect();
    let exact = truncated_zeta(2.0 * sigma, prime_limit) * gcd_sum_naive(f, sigma)?.value;
    Ok(compare(&values, exact))
}

/// `Σ_{ab=cd} f(a) f(b) f(c) f(d)`, by hashing products.
pub fn multiplicative_fourth_moment(f: &WeightedSupport) -> f64 {
    let mut products: HashMap<u128, CompensatedSum> = HashMap::new();
    for &(a, fa) in f.entries() {
        for &(b, fb) in f.entries() {
            products.entry(a as u128 * b as u128).or_default().add(fa * fb);
        }
    }
    let mut keys: Vec<u128> = products.keys().copied().collect();
    keys.sort_unstable();
    compensated_sum(keys.into_iter().map(|k| products[&k].value().powi(2)))
}

/// Monte Carlo `E|D(X)|⁴` against the exact product-hash count.
pub fn fourth_moment_d(f: &WeightedSupport, samples: usize, seed: u64, prime_limit: u64) -> Result<McComparison> {
    check_samples(samples)?;
    // σ does not enter D(X); any valid value builds the sampler.
    let sampler = ZetaSampler::new(0.75, prime_limit, seed)?;
    let support = SmoothSupport::new(f, sampler.primes())?;
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| support.evaluate(&sampler.sample(i).angles).norm_sqr().powi(2))
        .collect();
    Ok(compare(&values, multiplicative_fourth_moment(f)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    /// `log Π_{p ≤ P} E_l(p)`.
    pub exact_log: Option<f64>,
    /// Monte Carlo mean of `|ζ_{X,P}(σ)|^{2l}`.
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub samples: usize,
}

/// Exact truncated moment together with a Monte Carlo estimate of the same
/// quantity. The estimate is heavy-tailed for large `l` and is reported for
/// context only.
pub fn moment_estimate(cfg: &RandomZetaConfig) -> Result<MomentEstimate> {
    let exact_log = exact_truncated_moment(cfg)?;
    let (mc_mean, mc_stderr) = if cfg.samples >= 2 {
        let sampler = ZetaSampler::from_config(cfg)?;
        let values: Vec<f64> = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| sampler.sample(i).zeta.norm_sqr().powi(cfg.l as i32))
            .collect();
        let c = compare(&values, exact_log.exp());
        (c.mc_mean, c.mc_stderr)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(MomentEstimate {
        exact_log: Some(exact_log),
        mc_mean,
        mc_stderr,
        samples: cfg.samples,
    })
}
