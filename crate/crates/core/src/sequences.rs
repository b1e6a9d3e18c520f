//! Strictly increasing natural-number sequences: generators and file loading.

use std::fmt;
use std::path::Path;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// The first `N` terms `a_1 < a_2 < … < a_N` of a sequence of naturals.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerSequence {
    terms: Vec<BigUint>,
    small: Option<Vec<u64>>,
    label: String,
}

impl fmt::Debug for IntegerSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegerSequence")
            .field("label", &self.label)
            .field("len", &self.terms.len())
            .finish()
    }
}

impl IntegerSequence {
    /// Validates strict monotonicity and positivity.
    pub fn new(terms: Vec<BigUint>, label: impl Into<String>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            if t.is_zero() {
                return Err(Error::Domain(format!(
                    "term {} is 0; sequence terms must be natural numbers >= 1",
                    i + 1
                )));
            }
            if i > 0 && *t <= terms[i - 1] {
                return Err(Error::NotIncreasing {
                    index: i + 1,
                    value: t.to_string(),
                });
            }
        }
        let small = terms.iter().map(|t| t.to_u64()).collect::<Option<Vec<u64>>>();
        Ok(Self {
            terms,
            small,
            label: label.into(),
        })
    }

    pub fn from_u64(terms: Vec<u64>, label: impl Into<String>) -> Result<Self> {
        Self::new(terms.into_iter().map(BigUint::from).collect(), label)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    /// The terms as machine words, when every term fits in 64 bits.
    pub fn as_u64(&self) -> Option<&[u64]> {
        self.small.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max(&self) -> Option<&BigUint> {
        self.terms.last()
    }

    /// `A_n`: the first `n` terms.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::Size(format!(
                "prefix of length {n} requested from a sequence of {} terms",
                self.len()
            )));
        }
        Ok(Self {
            terms: self.terms[..n].to_vec(),
            small: self.small.as_ref().map(|s| s[..n].to_vec()),
            label: format!("{}[..{n}]", self.label),
        })
    }
}

/// `(1^d, 2^d, …, N^d)` in exact arithmetic.
pub fn gen_power(d: u32, n: usize) -> Result<IntegerSequence> {
    if d == 0 {
        return Err(Error::Domain("power sequence needs d >= 1".into()));
    }
    let terms = (1..=n as u64)
        .map(|k| match k.checked_pow(d) {
            Some(v) => BigUint::from(v),
            None => BigUint::from(k).pow(d),
        })
        .collect();
    IntegerSequence::new(terms, format!("power(d={d})"))
}

/// First index of [`gen_nlogk`]: `ln n > 1` from here on, so consecutive
/// values of `n (ln n)^K` differ by more than 1 and their floors are distinct.
pub const NLOGK_START: u64 = 3;

/// Fractional bits of the first two working precisions and the ceiling.
const FLOOR_PRECISIONS: [usize; 4] = [80, 160, 320, 512];
const FLOOR_GUARD_LOG2: i32 = 40;

/// `N` terms `floor(n (ln n)^K)` for `n = 3, 4, …, N + 2`.
///
/// Each floor is certified: two working precisions must agree and the value
/// must sit at least `2^-40` away from an integer, otherwise precision is
/// escalated up to 512 fractional bits.
pub fn gen_nlogk(k: f64, n: usize) -> Result<IntegerSequence> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::Domain(format!("nlogk sequence needs K >= 1, got {k}")));
    }
    let terms = (0..n as u64)
        .into_par_iter()
        .map_init(
            || Consts::new().expect("astro-float constants cache"),
            |cc, i| certified_nlogk_floor(NLOGK_START + i, k, cc),
        )
        .collect::<Result<Vec<_>>>()?;
    IntegerSequence::new(terms, format!("nlogk(K={k},n0={NLOGK_START})"))
}

/// Certified `floor(n (ln n)^K)`.
pub fn certified_nlogk_floor(n: u64, k: f64, cc: &mut Consts) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::Domain(format!("n (ln n)^K needs n >= 2, got {n}")));
    }
    // Integer bits of the value, with headroom.
    let approx_bits = ((n as f64).log2() + k * (n as f64).ln().ln().max(0.0) / std::f64::consts::LN_2)
        .ceil()
        .max(1.0) as usize
        + 8;
    let mut previous: Option<BigUint> = None;
    for &frac_bits in &FLOOR_PRECISIONS {
        let (floor, clear) = nlogk_floor_at(n, k, approx_bits + frac_bits, cc)?;
        if let Some(prev) = &previous {
            if *prev == floor && clear {
                return Ok(floor);
            }
        }
        previous = Some(floor);
    }
    Err(Error::Precision(format!(
        "floor of {n}*(ln {n})^{k} not certified at {} fractional bits",
        FLOOR_PRECISIONS[FLOOR_PRECISIONS.len() - 1]
    )))
}

/// Floor at working precision `p`, and whether the value is clear of the
/// nearest integer by the guard distance.
fn nlogk_floor_at(n: u64, k: f64, p: usize, cc: &mut Consts) -> Result<(BigUint, bool)> {
    let rm = RoundingMode::ToEven;
    let nf = BigFloat::from_u64(n, p);
    let ln_n = nf.ln(p, rm, cc);
    let power = if k.fract() == 0.0 && k <= 64.0 {
        ln_n.powi(k as usize, p, rm)
    } else {
        let kf = BigFloat::from_f64(k, p);
        ln_n.ln(p, rm, cc).mul(&kf, p, rm).exp(p, rm, cc)
    };
    let value = nf.mul(&power, p, rm);
    if value.is_nan() || value.is_inf() {
        return Err(Error::Precision(format!("non-finite value for n={n}, K={k}")));
    }
    let floor = value.floor();
    let frac = value.sub(&floor, p, rm);
    let guard = BigFloat::from_f64(2f64.powi(-FLOOR_GUARD_LOG2), p);
    let upper = BigFloat::from_u8(1, p).sub(&guard, p, rm);
    let clear = frac >= guard && frac <= upper;
    Ok((bigfloat_to_biguint(&floor)?, clear))
}

/// Converts a nonnegative integer-valued `BigFloat` to `BigUint`.
pub(crate) fn bigfloat_to_biguint(x: &BigFloat) -> Result<BigUint> {
    if x.is_zero() {
        return Ok(BigUint::zero());
    }
    let (words, _, sign, exponent, _) = x
        .as_raw_parts()
        .ok_or_else(|| Error::Precision("non-finite big float".into()))?;
    if sign == Sign::Neg {
        return Err(Error::Domain("negative value where a natural was expected".into()));
    }
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    let mantissa = BigUint::from_bytes_le(&bytes);
    // value = mantissa * 2^(exponent - mantissa_bits)
    let shift = exponent as i64 - (words.len() as i64) * 64;
    Ok(if shift >= 0 {
        mantissa << shift as usize
    } else {
        mantissa >> (-shift) as usize
    })
}

/// Parses a sequence from text: one integer per line, or OEIS b-file lines
/// `index value`. Blank lines and lines starting with `#` are skipped.
pub fn parse_sequence(text: &str, label: impl Into<String>) -> Result<IntegerSequence> {
    let mut terms: Vec<BigUint> = Vec::new();
    let mut last_index: Option<i128> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = lineno + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let value_field = match fields.as_slice() {
            [v] => v,
            [idx, v] => {
                let idx: i128 = idx.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad b-file index {idx:?}"),
                })?;
                if last_index.is_some_and(|prev| idx <= prev) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("b-file index {idx} out of order"),
                    });
                }
                last_index = Some(idx);
                v
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `value` or `index value`, got {line:?}"),
                })
            }
        };
        let value: BigUint = value_field.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("not a natural number: {value_field:?}"),
        })?;
        if value.is_zero() {
            return Err(Error::Parse {
                line: line_no,
                message: "terms must be >= 1".into(),
            });
        }
        terms.push(value);
    }
    IntegerSequence::new(terms, label)
}

pub fn load_sequence(path: impl AsRef<Path>) -> Result<IntegerSequence> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_sequence(&text, format!("file({})", path.display()))
}

/// Largest term's bit length (0 for an empty sequence).
pub fn max_bits(seq: &IntegerSequence) -> u64 {
    seq.max().map_or(0, |m| m.bits())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u64s(seq: &IntegerSequence) -> Vec<u64> {
        seq.as_u64().unwrap().to_vec()
    }

    #[test]
    fn powers() {
        assert_eq!(u64s(&gen_power(1, 3).unwrap()), vec![1, 2, 3]);
        assert_eq!(u64s(&gen_power(2, 4).unwrap()), vec![1, 4, 9, 16]);
        assert_eq!(u64s(&gen_power(3, 3).unwrap()), vec![1, 8, 27]);
        assert!(gen_power(0, 3).is_err());
    }

    #[test]
    fn powers_beyond_u64_stay_exact() {
        let seq = gen_power(30, 5).unwrap();
        assert!(seq.as_u64().is_none());
        assert_eq!(seq.terms()[4], BigUint::from(5u32).pow(30));
    }

    #[test]
    fn nlogk_examples() {
        let seq = gen_nlogk(1.0, 5).unwrap();
        assert_eq!(seq.terms()[0], BigUint::from(3u32));
        assert!(seq.label().contains("n0=3"));
        // n = 10 is the 8th term when starting from 3.
        let seq = gen_nlogk(2.0, 8).unwrap();
        assert_eq!(seq.terms()[7], BigUint::from(53u32));
        assert!(gen_nlogk(0.0, 5).is_err());
        assert!(gen_nlogk(0.5, 5).is_err());
    }

    #[test]
    fn biguint_conversion() {
        for v in [1u64, 2, 3, 1 << 40, u64::MAX] {
            let b = BigFloat::from_u64(v, 256);
            assert_eq!(bigfloat_to_biguint(&b).unwrap(), BigUint::from(v));
        }
        let b = BigFloat::from_f64(0.75, 128);
        assert_eq!(bigfloat_to_biguint(&b.floor()).unwrap(), BigUint::zero());
    }

    #[test]
    fn parse_plain_and_bfile() {
        let s = parse_sequence("1\n2\n4\n8\n", "t").unwrap();
        assert_eq!(u64s(&s), vec![1, 2, 4, 8]);
        let s = parse_sequence("# A000000\n1 1\n2 3\n3 7\n", "t").unwrap();
        assert_eq!(u64s(&s), vec![1, 3, 7]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_sequence("5\n5\n", "t").unwrap_err(),
            Error::NotIncreasing {
                index: 2,
                value: "5".into()
            }
        );
        match parse_sequence("1\nx\n", "t").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse_sequence("1 2 3\n", "t"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_sequence("2 1\n1 3\n", "t"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_sequence("0\n1\n", "t"), Err(Error::Parse { .. })));
    }

    #[test]
    fn prefix_keeps_terms() {
        let s = gen_power(2, 10).unwrap();
        let p = s.prefix(4).unwrap();
        assert_eq!(u64s(&p), vec![1, 4, 9, 16]);
        assert!(s.prefix(11).is_err());
    }
}
