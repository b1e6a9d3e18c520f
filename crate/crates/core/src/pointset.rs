//! Fractional parts `{a_n α}` with a certified absolute error bound.
//!
//! Points are held as 64-bit fixed-point fractions of a turn (`x = k / 2^64`).
//! Circle distances between such points are exact integer operations, so the
//! only error in any downstream comparison is the per-point reduction error
//! recorded in [`PointSet::error_turns`].

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sequences::IntegerSequence;
use crate::stream::{Domain, Substream};

/// Default fractional bits for fixed-point α.
pub const DEFAULT_ALPHA_BITS: u32 = 256;
/// Smallest accepted fixed-point precision.
pub const MIN_ALPHA_BITS: u32 = 64;
/// Point sets with a larger per-point error are rejected.
pub const MAX_POINT_ERROR_LOG2: i32 = -50;

const TURN: f64 = 18446744073709551616.0; // 2^64

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaRepr {
    /// `num / den` with `0 <= num < den`, in lowest terms.
    Rational { num: BigUint, den: BigUint },
    /// `mantissa / 2^frac_bits` with `mantissa < 2^frac_bits`.
    Fixed { mantissa: BigUint, frac_bits: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaOrigin {
    Literal,
    SeededRandom { seed: u64, index: u64 },
}

/// The dilation parameter α, reduced mod 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealParameter {
    repr: AlphaRepr,
    origin: AlphaOrigin,
}

impl RealParameter {
    pub fn rational(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        if den.is_zero() {
            return Err(Error::Domain("rational alpha with zero denominator".into()));
        }
        let num = num % &den;
        let g = num.gcd(&den);
        let (num, den) = if g.is_zero() {
            (BigUint::zero(), BigUint::one())
        } else {
            (num / &g, den / &g)
        };
        Ok(Self {
            repr: AlphaRepr::Rational { num, den },
            origin: AlphaOrigin::Literal,
        })
    }

    pub fn fixed(mantissa: BigUint, frac_bits: u32) -> Result<Self> {
        if frac_bits < MIN_ALPHA_BITS {
            return Err(Error::Precision(format!(
                "fixed-point alpha needs at least {MIN_ALPHA_BITS} fractional bits, got {frac_bits}"
            )));
        }
        let mantissa = mantissa % (BigUint::one() << frac_bits as usize);
        Ok(Self {
            repr: AlphaRepr::Fixed { mantissa, frac_bits },
            origin: AlphaOrigin::Literal,
        })
    }

    /// Exact value of a decimal literal such as `0.618` or `3`.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("not a nonnegative decimal: {text:?}"));
        let (int_part, frac_part) = text.split_once('.').unwrap_or((text, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let num: BigUint = if digits.is_empty() {
            BigUint::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let den = BigUint::from(10u32).pow(frac_part.len() as u32);
        Self::rational(num, den)
    }

    /// Accepts `p/q`, a decimal literal, or `random:<seed>` (sample 0 of
    /// [`sample_alpha`] at the default precision).
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(seed) = text.strip_prefix("random:") {
            let seed: u64 = seed
                .parse()
                .map_err(|_| Error::Domain(format!("bad random seed {seed:?}")))?;
            return Ok(sample_alpha(seed, 1, DEFAULT_ALPHA_BITS)?.remove(0));
        }
        if let Some((p, q)) = text.split_once('/') {
            let parse = |s: &str| {
                s.trim()
                    .parse::<BigUint>()
                    .map_err(|_| Error::Domain(format!("bad rational alpha {text:?}")))
            };
            return Self::rational(parse(p)?, parse(q)?);
        }
        Self::from_decimal(text)
    }

    pub fn repr(&self) -> &AlphaRepr {
        &self.repr
    }

    pub fn origin(&self) -> AlphaOrigin {
        self.origin
    }

    /// Nearest double (for display only).
    pub fn to_f64(&self) -> f64 {
        match &self.repr {
            AlphaRepr::Rational { num, den } => ratio_to_f64(num, den),
            AlphaRepr::Fixed { mantissa, frac_bits } => {
                ratio_to_f64(mantissa, &(BigUint::one() << *frac_bits as usize))
            }
        }
    }
}

fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    // 64 significant bits of the quotient are plenty for a double.
    let shift = (den.bits() as i64 - num.bits() as i64 + 64).max(0) as usize;
    let q = (num << shift) / den;
    let top = q.bits().saturating_sub(64) as usize;
    let mantissa = (q >> top).to_u64().unwrap_or(u64::MAX) as f64;
    mantissa * 2f64.powi(top as i32 - shift as i32)
}

impl fmt::Display for RealParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.repr, self.origin) {
            (_, AlphaOrigin::SeededRandom { seed, index }) => {
                write!(f, "random(seed={seed},index={index})")
            }
            (AlphaRepr::Rational { num, den }, _) => write!(f, "{num}/{den}"),
            (AlphaRepr::Fixed { frac_bits, .. }, _) => {
                write!(f, "fixed({:.17},B={frac_bits})", self.to_f64())
            }
        }
    }
}

/// `count` reproducible uniform α in `[0,1)` with `frac_bits` fractional
/// bits. Sample `i` depends only on `(seed, i)`.
pub fn sample_alpha(seed: u64, count: usize, frac_bits: u32) -> Result<Vec<RealParameter>> {
    if count == 0 {
        return Err(Error::Domain("sample_alpha needs count >= 1".into()));
    }
    (0..count as u64).map(|i| sample_alpha_at(seed, i, frac_bits)).collect()
}

/// The `index`-th sample of [`sample_alpha`].
pub fn sample_alpha_at(seed: u64, index: u64, frac_bits: u32) -> Result<RealParameter> {
    let mut stream = Substream::new(seed, Domain::Alpha, index);
    let words = frac_bits.div_ceil(64) as usize;
    let bytes: Vec<u8> = (0..words).flat_map(|_| stream.next_u64().to_le_bytes()).collect();
    let raw = BigUint::from_bytes_le(&bytes) >> (words * 64 - frac_bits as usize);
    let mut alpha = RealParameter::fixed(raw, frac_bits)?;
    alpha.origin = AlphaOrigin::SeededRandom { seed, index };
    Ok(alpha)
}

/// Points on the circle `[0,1)` as fractions of a turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    turns: Vec<u64>,
    error_turns: u64,
    source: String,
}

impl PointSet {
    /// Builds a point set from turn values with an absolute per-point error
    /// of `error_turns / 2^64`.
    pub fn from_turns(turns: Vec<u64>, error_turns: u64, source: impl Into<String>) -> Result<Self> {
        let bound = error_turns as f64 / TURN;
        if bound >= 2f64.powi(MAX_POINT_ERROR_LOG2) {
            return Err(Error::Precision(format!(
                "point error bound {bound:e} is not below 2^{MAX_POINT_ERROR_LOG2}"
            )));
        }
        Ok(Self {
            turns,
            error_turns,
            source: source.into(),
        })
    }

    /// Rounds doubles in `[0,1)` to the turn grid (error ≤ 1 turn).
    pub fn from_f64(points: &[f64], source: impl Into<String>) -> Result<Self> {
        let turns = points
            .iter()
            .map(|&x| {
                if !(0.0..1.0).contains(&x) {
                    return Err(Error::Domain(format!("point {x} outside [0,1)")));
                }
                Ok((x * TURN) as u64)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_turns(turns, 1, source)
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn turns(&self) -> &[u64] {
        &self.turns
    }

    pub fn error_turns(&self) -> u64 {
        self.error_turns
    }

    /// Absolute per-point error bound.
    pub fn error_bound(&self) -> f64 {
        self.error_turns as f64 / TURN
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Points as doubles in `[0,1)` (truncated to 53 bits).
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.turns.iter().map(|&t| turn_to_f64(t))
    }

    /// Rotates every point by `shift` turns.
    pub fn rotated(&self, shift: u64) -> Self {
        Self {
            turns: self.turns.iter().map(|t| t.wrapping_add(shift)).collect(),
            error_turns: self.error_turns,
            source: format!("{}+rot", self.source),
        }
    }
}

pub fn turn_to_f64(t: u64) -> f64 {
    (t >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Circle distance in turns: `min(|x−y|, 1−|x−y|)` on the `2^64` grid.
pub fn circle_distance_turns(x: u64, y: u64) -> u64 {
    let d = x.wrapping_sub(y);
    d.min(d.wrapping_neg())
}

/// `‖x − y‖` for `x, y ∈ [0,1)`.
pub fn nearest_int_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

/// `{a_n α}` for every term of `seq`.
pub fn frac_parts(seq: &IntegerSequence, alpha: &RealParameter) -> Result<PointSet> {
    let source = format!("{{a_n*alpha}}: seq={}, alpha={alpha}", seq.label());
    match alpha.repr() {
        AlphaRepr::Rational { num, den } => {
            let turns = rational_turns(seq, num, den);
            // Exact when den divides 2^64.
            let exact = den.bits() <= 65 && (den & (den - 1u32)).is_zero();
            PointSet::from_turns(turns, if exact { 0 } else { 1 }, source)
        }
        AlphaRepr::Fixed { mantissa, frac_bits } => {
            let a_bits = seq.max().map_or(0, |m| m.bits());
            if (*frac_bits as u64) < a_bits + 64 {
                return Err(Error::Precision(format!(
                    "alpha carries {frac_bits} fractional bits; terms of {a_bits} bits need at least {}",
                    a_bits + 64
                )));
            }
            let turns = fixed_turns(seq, mantissa, *frac_bits);
            // a_N·2^-B ≤ 2^-64 from the precondition, plus one turn of truncation.
            PointSet::from_turns(turns, 2, source)
        }
    }
}

fn rational_turns(seq: &IntegerSequence, num: &BigUint, den: &BigUint) -> Vec<u64> {
    if let (Some(terms), Some(p), Some(q)) = (seq.as_u64(), num.to_u64(), den.to_u64()) {
        let (p, q) = (p as u128, q as u128);
        return terms
            .iter()
            .map(|&a| {
                let r = (a as u128 % q) * p % q;
                ((r << 64) / q) as u64
            })
            .collect();
    }
    seq.terms()
        .iter()
        .map(|a| {
            let r = (a * num) % den;
            ((r << 64usize) / den).to_u64().expect("residue below denominator")
        })
        .collect()
}

fn fixed_turns(seq: &IntegerSequence, mantissa: &BigUint, frac_bits: u32) -> Vec<u64> {
    if let (Some(terms), 0) = (seq.as_u64(), frac_bits % 64) {
        let mut limbs = mantissa.to_u64_digits();
        limbs.resize((frac_bits / 64) as usize, 0);
        return terms.iter().map(|&a| top_fraction_limb(&limbs, a)).collect();
    }
    let modulus_mask = (BigUint::one() << frac_bits as usize) - 1u32;
    seq.terms()
        .iter()
        .map(|a| {
            let low = (a * mantissa) & &modulus_mask;
            (low >> (frac_bits as usize - 64)).to_u64().expect("64-bit window")
        })
        .collect()
}

/// Top limb of `(a · α) mod 2^(64·len)` for little-endian limbs `α`.
fn top_fraction_limb(limbs: &[u64], a: u64) -> u64 {
    let mut carry: u128 = 0;
    let mut last = 0u64;
    for &limb in limbs {
        let t = limb as u128 * a as u128 + carry;
        last = t as u64;
        carry = t >> 64;
    }
    last
}
