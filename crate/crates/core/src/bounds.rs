//! Explicit constants, the threshold for `C`, the exponent chain, and grid
//! verification of the elementary inequalities used by the moment bounds.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// A report passes when its smallest margin is at least this.
pub const MARGIN_TOLERANCE: f64 = -1e-12;

/// Nodes per parameter dimension on the default grids.
pub const DEFAULT_GRID_NODES: usize = 10_000;

/// Smallest `C` for which the exponent chain is defined.
pub const C_MIN: f64 = 7.5;

const LOW_PRECISION: usize = 80;
const HIGH_PRECISION: usize = 160;
const BISECTION_TOL: f64 = 1e-10;

fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (words, _, sign, exponent, _) = x.as_raw_parts().expect("finite big float");
    let top = *words.last().expect("nonempty mantissa") as f64;
    let v = top * 2f64.powi(exponent - 64);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

/// `−2√3 − 6 ln(1 − 1/√3)` at `p` bits.
pub fn beta_at_precision(p: usize, cc: &mut Consts) -> BigFloat {
    let rm = RoundingMode::ToEven;
    let sqrt3 = BigFloat::from_u8(3, p).sqrt(p, rm);
    let one = BigFloat::from_u8(1, p);
    let inner = one.sub(&one.div(&sqrt3, p, rm), p, rm);
    let log_term = inner.ln(p, rm, cc).mul(&BigFloat::from_u8(6, p), p, rm);
    sqrt3.mul(&BigFloat::from_u8(2, p), p, rm).add(&log_term, p, rm).neg()
}

/// `β + 5 + 2√(2β + 7)` at `p` bits.
fn c_threshold_at_precision(p: usize, cc: &mut Consts) -> BigFloat {
    let rm = RoundingMode::ToEven;
    let b = beta_at_precision(p, cc);
    let root = b
        .mul(&BigFloat::from_u8(2, p), p, rm)
        .add(&BigFloat::from_u8(7, p), p, rm)
        .sqrt(p, rm);
    b.add(&BigFloat::from_u8(5, p), p, rm)
        .add(&root.mul(&BigFloat::from_u8(2, p), p, rm), p, rm)
}

/// The value at `HIGH_PRECISION` rounded to f64, and `|x₈₀ − x₁₆₀|`.
fn two_precisions(f: fn(usize, &mut Consts) -> BigFloat) -> (f64, f64) {
    let mut cc = Consts::new().expect("astro-float constants cache");
    let lo = f(LOW_PRECISION, &mut cc);
    let hi = f(HIGH_PRECISION, &mut cc);
    let gap = hi.sub(&lo, HIGH_PRECISION, RoundingMode::ToEven).abs();
    (big_to_f64(&hi), big_to_f64(&gap))
}

/// β, evaluated in multiple precision and rounded to f64.
pub fn compute_beta() -> f64 {
    two_precisions(beta_at_precision).0
}

/// Cached [`compute_beta`].
pub fn beta() -> f64 {
    static BETA: OnceLock<f64> = OnceLock::new();
    *BETA.get_or_init(compute_beta)
}

/// `F(a) = βa² + 2a + 2 ln(1 − a)`, which vanishes at `a = 1/√3`.
pub fn beta_endpoint_function(a: f64) -> f64 {
    beta() * a * a + 2.0 * a + 2.0 * (-a).ln_1p()
}

/// Root of `C − β − 2√(2C+1) = 1`, by bisection on `(β+5, 100)`.
pub fn solve_c_threshold() -> f64 {
    let b = beta();
    let g = |c: f64| c - b - 2.0 * (2.0 * c + 1.0).sqrt() - 1.0;
    let (mut lo, mut hi) = (b + 5.0, 100.0);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `β + 5 + 2√(2β + 7)`: the same root in closed form.
pub fn c_threshold_closed_form() -> f64 {
    two_precisions(c_threshold_at_precision).0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentChain {
    pub c: f64,
    /// Exponent of `log N` in the weighted difference-set GCD sum bound,
    /// `β − 1 + 2√(2C+1) − C`.
    pub gcd_exponent: f64,
    /// Exponent of `log N` in the variance bound, `β + 2√(2C+1) − C`.
    pub variance_exponent: f64,
    /// Moment order `(√(2C+1) − 2)/2`.
    pub l: f64,
    /// Exponent of `log N` in the cut-off `V`, `β/2 + √(2C+1)`.
    pub v_exponent: f64,
}

pub fn variance_exponent(c: f64) -> Result<ExponentChain> {
    if !(c >= C_MIN) || !c.is_finite() {
        return Err(Error::Domain(format!("exponent chain needs C >= 15/2, got {c}")));
    }
    let b = beta();
    let r = (2.0 * c + 1.0).sqrt();
    let gcd_exponent = b - 1.0 + 2.0 * r - c;
    Ok(ExponentChain {
        c,
        gcd_exponent,
        variance_exponent: gcd_exponent + 1.0,
        l: (r - 2.0) / 2.0,
        v_exponent: b / 2.0 + r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsTable {
    pub beta: f64,
    /// `|β₈₀ − β₁₆₀|` between 80- and 160-bit evaluations.
    pub beta_precision_gap: f64,
    pub c_threshold: f64,
    pub c_threshold_closed_form: f64,
    pub c_threshold_precision_gap: f64,
    pub at_threshold: ExponentChain,
}

pub fn constants_table() -> Result<ConstantsTable> {
    let (beta, beta_precision_gap) = two_precisions(beta_at_precision);
    let (closed, c_gap) = two_precisions(c_threshold_at_precision);
    let c = solve_c_threshold();
    Ok(ConstantsTable {
        beta,
        beta_precision_gap,
        c_threshold: c,
        c_threshold_closed_form: closed,
        c_threshold_precision_gap: c_gap,
        at_threshold: variance_exponent(c)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridAxis {
    fn of(name: &str, values: &[f64]) -> Self {
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        Self {
            name: name.into(),
            min,
            max,
            steps: values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub min_margin: f64,
    pub pass: bool,
    pub worst_point: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub grid_spec: Vec<GridAxis>,
    /// Smallest margin of the inequality itself over the grid.
    pub min_margin: f64,
    /// `min_margin` and every auxiliary check at least [`MARGIN_TOLERANCE`].
    pub pass: bool,
    pub worst_point: Vec<(String, f64)>,
    /// Side conditions the grid certificate relies on.
    pub auxiliary: Vec<CheckResult>,
    /// Why a clean grid rules out a violation between nodes.
    pub certificate: String,
}

/// Running minimum of a margin. Ties keep the smaller `order` so the result
/// does not depend on reduction order.
#[derive(Debug, Clone)]
struct Worst {
    margin: f64,
    order: usize,
    point: Vec<(&'static str, f64)>,
}

impl Worst {
    fn none() -> Self {
        Self {
            margin: f64::INFINITY,
            order: usize::MAX,
            point: Vec::new(),
        }
    }

    fn at(margin: f64, order: usize, point: Vec<(&'static str, f64)>) -> Self {
        Self { margin, order, point }
    }

    fn pick(self, other: Self) -> Self {
        // NaN margins are failures and must win.
        let key = |w: &Worst| if w.margin.is_nan() { f64::NEG_INFINITY } else { w.margin };
        match key(&self).total_cmp(&key(&other)) {
            std::cmp::Ordering::Less => self,
            std::cmp::Ordering::Greater => other,
            std::cmp::Ordering::Equal if self.order <= other.order => self,
            std::cmp::Ordering::Equal => other,
        }
    }

    fn result(self, name: &str) -> CheckResult {
        let min_margin = if self.margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            self.margin
        };
        CheckResult {
            name: name.into(),
            min_margin,
            pass: min_margin >= MARGIN_TOLERANCE,
            worst_point: self.point.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }
}

/// One running minimum per check; slot 0 is the inequality itself.
#[derive(Debug, Clone)]
struct Checks(Vec<Worst>);

impl Checks {
    fn new(n: usize) -> Self {
        Self(vec![Worst::none(); n])
    }

    fn add(&mut self, slot: usize, w: Worst) {
        let cur = std::mem::replace(&mut self.0[slot], Worst::none());
        self.0[slot] = cur.pick(w);
    }

    fn merge(self, other: Self) -> Self {
        Self(self.0.into_iter().zip(other.0).map(|(a, b)| a.pick(b)).collect())
    }

    fn report(self, id: &str, names: &[&str], grid_spec: Vec<GridAxis>, certificate: &str) -> LemmaReport {
        let mut results = self.0.into_iter().zip(names).map(|(w, n)| w.result(n));
        let main = results.next().expect("main check");
        let auxiliary: Vec<CheckResult> = results.collect();
        LemmaReport {
            lemma_id: id.into(),
            grid_spec,
            min_margin: main.min_margin,
            pass: main.pass && auxiliary.iter().all(|c| c.pass),
            worst_point: main.worst_point,
            auxiliary,
            certificate: certificate.into(),
        }
    }
}

fn check_grid(name: &str, values: &[f64], lo: f64, hi: f64, open_lo: bool, open_hi: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Domain(format!("{name} grid is empty")));
    }
    for &v in values {
        let below = if open_lo { v <= lo } else { v < lo };
        let above = if open_hi { v >= hi } else { v > hi };
        if !v.is_finite() || below || above {
            let (l, r) = (if open_lo { "(" } else { "[" }, if open_hi { ")" } else { "]" });
            return Err(Error::Domain(format!("{name} = {v} outside {l}{lo}, {hi}{r}")));
        }
    }
    Ok(())
}

/// `n` evenly spaced nodes on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` evenly spaced interior nodes of `(lo, hi)`.
pub fn interior_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

pub fn default_a_grid(n: usize) -> Vec<f64> {
    let top = 1.0 / 3f64.sqrt();
    (1..=n).map(|i| top * i as f64 / n as f64).collect()
}

pub fn default_x_grid(n: usize) -> Vec<f64> {
    linspace(0.0, TAU, n)
}

pub fn default_l_grid() -> Vec<u32> {
    (1..=8).collect()
}

pub fn default_alpha_grid(n: usize) -> Vec<f64> {
    linspace(0.5, 0.75, n)
}

pub fn default_t_grid(n: usize) -> Vec<f64> {
    linspace(0.0, 50.0, n)
}

pub fn default_sigma_grid(n: usize) -> Vec<f64> {
    interior_grid(0.5, 0.75, n)
}

const BETA_CERTIFICATE: &str = "log of the ratio is βa² + 2ay + ln(1 + a² − 2ay) with y = cos x, \
concave in y, so its minimum over x sits at x = 0 or x = π; both endpoint margins are checked on every \
a node. F(a) = βa² + 2a + 2ln(1 − a) rises from 0 and then falls to 0 at 1/√3 (F'' changes sign once), \
and βa² − 2a + 2ln(1 + a) ≥ (β − 1)a² ≥ 0 since ln(1 + a) ≥ a − a²/2. The l-th power is \
monotone in the base, so l > 1 adds nothing beyond l = 1.";

/// `exp(βa² + 2a cos x)(1 + a² − 2a cos x)^1 ≥ 1`, checked as the margin
/// `g^l − 1` for each `l`, plus the `x = 0` and `x = π` endpoint margins.
pub fn verify_lemma_beta_inequality(a_grid: &[f64], x_grid: &[f64], l_grid: &[u32]) -> Result<LemmaReport> {
    check_grid("a", a_grid, 0.0, 1.0 / 3f64.sqrt() + 1e-15, false, false)?;
    check_grid("x", x_grid, 0.0, TAU, false, false)?;
    if l_grid.is_empty() || l_grid.contains(&0) {
        return Err(Error::Domain("l grid must be nonempty and contain only l >= 1".into()));
    }
    let b = beta();
    let cosines: Vec<f64> = x_grid.iter().map(|x| x.cos()).collect();
    let checks = a_grid
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut checks = Checks::new(3);
            let mut g_min = f64::INFINITY;
            let mut j_min = 0usize;
            for (j, &c) in cosines.iter().enumerate() {
                let g = (b * a * a + 2.0 * a * c).exp() * (1.0 + a * a - 2.0 * a * c);
                if g < g_min || g.is_nan() {
                    g_min = g;
                    j_min = j;
                }
            }
            for (k, &l) in l_grid.iter().enumerate() {
                let point = vec![("a", a), ("x", x_grid[j_min]), ("l", l as f64)];
                checks.add(0, Worst::at(g_min.powi(l as i32) - 1.0, i * l_grid.len() + k, point));
            }
            checks.add(1, Worst::at(beta_endpoint_function(a), i, vec![("a", a)]));
            let f_pi = b * a * a - 2.0 * a + 2.0 * a.ln_1p();
            checks.add(2, Worst::at(f_pi.min((b - 1.0) * a * a), i, vec![("a", a)]));
            checks
        })
        .reduce(|| Checks::new(3), Checks::merge);
    let l_values: Vec<f64> = l_grid.iter().map(|&l| l as f64).collect();
    Ok(checks.report(
        "beta_inequality",
        &[
            "exp(l(βa² + 2a cos x))(1 + a² − 2a cos x)^l − 1",
            "x = 0: βa² + 2a + 2ln(1 − a)",
            "x = π: min(βa² − 2a + 2ln(1 + a), (β − 1)a²)",
        ],
        vec![
            GridAxis::of("a", a_grid),
            GridAxis::of("x", x_grid),
            GridAxis::of("l", &l_values),
        ],
        BETA_CERTIFICATE,
    ))
}

/// `2.56/2^{2α} + ln(1 − 2^{−α})`.
pub fn two_alpha_margin(alpha: f64) -> f64 {
    2.56 * (-2.0 * alpha).exp2() + (-(-alpha).exp2()).ln_1p()
}

const TWO_ALPHA_CERTIFICATE: &str = "the margin is decreasing on [1/2, 3/4] (derivative between −0.24 and \
−0.10), so its minimum is the right endpoint; adjacent-node differences are checked to be positive.";

/// Margin of `ln((1 − 2^{−α})^{−1}) ≤ 2.56/2^{2α}` on the grid, together
/// with the decrease of the margin between consecutive grid nodes.
pub fn verify_lemma_2alpha(alpha_grid: &[f64]) -> Result<LemmaReport> {
    check_grid("alpha", alpha_grid, 0.5, 0.75, false, false)?;
    let mut sorted = alpha_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let values: Vec<f64> = sorted.iter().map(|&a| two_alpha_margin(a)).collect();
    let mut checks = Checks::new(2);
    for (i, (&a, &m)) in sorted.iter().zip(&values).enumerate() {
        checks.add(0, Worst::at(m, i, vec![("alpha", a)]));
    }
    for i in 1..values.len() {
        let point = vec![("alpha", sorted[i - 1]), ("alpha_next", sorted[i])];
        checks.add(1, Worst::at(values[i - 1] - values[i], i, point));
    }
    Ok(checks.report(
        "two_alpha",
        &["2.56/2^{2α} + ln(1 − 2^{−α})", "decrease between consecutive nodes"],
        vec![GridAxis::of("alpha", alpha_grid)],
        TWO_ALPHA_CERTIFICATE,
    ))
}

const BESSEL_TERM_BUDGET: usize = 1_000;

/// `ln I₀(t)` from the power series `Σ (t/2)^{2k}/(k!)²`.
pub fn log_bessel_i0(t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("I0 series needs finite t >= 0, got {t}")));
    }
    let q = t * t / 4.0;
    // Sum of the k >= 1 terms, so that ln_1p keeps accuracy at small t.
    let mut tail = 0.0;
    let mut term = 1.0;
    let mut previous = f64::INFINITY;
    for k in 1..=BESSEL_TERM_BUDGET {
        term *= q / (k * k) as f64;
        tail += term;
        if term < previous && term <= tail * f64::EPSILON * 0.5 {
            return Ok(tail.ln_1p());
        }
        previous = term;
    }
    Err(Error::Series(format!(
        "I0({t}) series did not converge within {BESSEL_TERM_BUDGET} terms"
    )))
}

const BESSEL_CERTIFICATE: &str = "d/dt (t²/4 − ln I₀(t)) = t/2 − I₁(t)/I₀(t) ≥ 0, so the margin is \
nondecreasing from 0 at t = 0.";

pub fn verify_bessel_bound(t_grid: &[f64]) -> Result<LemmaReport> {
    check_grid("t", t_grid, 0.0, 50.0, false, false)?;
    let margins = t_grid
        .par_iter()
        .map(|&t| Ok(t * t / 4.0 - log_bessel_i0(t)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut checks = Checks::new(1);
    for (i, (&m, &t)) in margins.iter().zip(t_grid).enumerate() {
        checks.add(0, Worst::at(m, i, vec![("t", t)]));
    }
    Ok(checks.report(
        "bessel_i0",
        &["t²/4 − ln I₀(t)"],
        vec![GridAxis::of("t", t_grid)],
        BESSEL_CERTIFICATE,
    ))
}

/// `B_{2k}` for `k = 1..=10`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];
const EM_CUTOFF: u32 = 16;
const EM_TERMS: usize = 9;

/// `ζ(s) − 1/(s − 1)` for real `s > 0`, `s ≠ 1` not required: the pole is
/// removed analytically. Returns the value and a bound on the truncation error.
pub fn zeta_minus_pole(s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("zeta evaluation needs finite s > 0, got {s}")));
    }
    let n = EM_CUTOFF as f64;
    let ln_n = n.ln();
    let head = crate::numeric::compensated_sum((1..EM_CUTOFF).map(|k| (k as f64).powf(-s)));
    // (N^{1−s} − 1)/(s − 1), continuous through s = 1.
    let x = (1.0 - s) * ln_n;
    let pole_part = if x == 0.0 { -ln_n } else { x.exp_m1() / (s - 1.0) };
    let mut sum = head + pole_part + 0.5 * n.powf(-s);
    // Rising factorial s(s+1)…(s+2k−2) / (2k)!, times N^{−s−2k+1}.
    let mut coeff = s / 2.0;
    let mut power = n.powf(-s - 1.0);
    let mut last = 0.0;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let k = j + 1;
        let term = b * coeff * power;
        if k <= EM_TERMS {
            sum += term;
        } else {
            last = term.abs();
        }
        let k = k as f64;
        coeff *= (s + 2.0 * k - 1.0) * (s + 2.0 * k) / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
        power /= n * n;
    }
    // For real s the remainder is bounded by the first omitted term.
    Ok((sum, last))
}

/// `ζ(s)` for real `s > 1`.
pub fn zeta_real(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta_real needs s > 1, got {s}")));
    }
    Ok(zeta_minus_pole(s)?.0 + 1.0 / (s - 1.0))
}

const ZETA_CERTIFICATE: &str = "ζ(s) − 1/(s − 1) is continuous and decreasing from γ ≈ 0.5772 on \
(1, 3/2], so 1 − |·| stays above 0.42; ln(1/(σ − 1/2)) − ln ζ(2σ) follows from ζ(2σ) < 1/(2σ − 1) + 1 \
≤ 2/(2σ − 1). Euler–Maclaurin error is bounded by the first omitted term (below 1e-20).";

/// Margins `1 − |ζ(2σ) − 1/(2σ − 1)|` and `ln(1/(σ − 1/2)) − ln ζ(2σ)`.
pub fn verify_zeta_near_half(sigma_grid: &[f64]) -> Result<LemmaReport> {
    check_grid("sigma", sigma_grid, 0.5, 0.75, true, true)?;
    let rows = sigma_grid
        .par_iter()
        .map(|&sigma| {
            let s = 2.0 * sigma;
            let (reg, err) = zeta_minus_pole(s)?;
            let zeta = reg + 1.0 / (s - 1.0);
            Ok((1.0 - reg.abs() - err, (1.0 / (sigma - 0.5)).ln() - zeta.ln()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let mut checks = Checks::new(2);
    for (i, (&(m1, m2), &sigma)) in rows.iter().zip(sigma_grid).enumerate() {
        checks.add(0, Worst::at(m1, i, vec![("sigma", sigma)]));
        checks.add(1, Worst::at(m2, i, vec![("sigma", sigma)]));
    }
    Ok(checks.report(
        "zeta_near_half",
        &["1 − |ζ(2σ) − 1/(2σ − 1)|", "ln(1/(σ − 1/2)) − ln ζ(2σ)"],
        vec![GridAxis::of("sigma", sigma_grid)],
        ZETA_CERTIFICATE,
    ))
}

/// All four verifiers on their default grids with `nodes` per dimension.
pub fn run_lemma_suite(nodes: usize) -> Result<Vec<LemmaReport>> {
    Ok(vec![
        verify_lemma_beta_inequality(&default_a_grid(nodes), &default_x_grid(nodes), &default_l_grid())?,
        verify_lemma_2alpha(&default_alpha_grid(nodes))?,
        verify_bessel_bound(&default_t_grid(nodes))?,
        verify_zeta_near_half(&default_sigma_grid(nodes))?,
    ])
}
