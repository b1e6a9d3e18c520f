//! `mppc`: batch runs over sequences, pair correlation, energies, GCD sums,
//! the random Euler product model and the lemma checks.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mppc_core as core;
use mppc_core::{EnergyOptions, IntegerSequence, PointSet, RandomZetaConfig, RealParameter, WeightedSupport};
use serde_json::json;

use output::{Cell, Format, Report, Sink, Table};

#[derive(Parser, Debug)]
#[command(
    name = "mppc",
    version,
    about = "Pair correlation, additive energy, GCD sums and random Euler products"
)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Omit the timestamp line (CSV) or fields (JSON), for byte-identical output.
    #[arg(long, global = true)]
    suppress_header: bool,
    /// Worker threads; results do not depend on this. Default: all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest integer the divisor sieve may cover.
    #[arg(long, global = true, env = "MPPC_SIEVE_LIMIT", default_value_t = core::DEFAULT_SIEVE_LIMIT)]
    sieve_limit: u64,
    /// Largest number of element pairs an energy or difference computation may visit.
    #[arg(long, global = true, env = "MPPC_PAIR_BUDGET", default_value_t = core::DEFAULT_PAIR_BUDGET)]
    pair_budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SeqArgs {
    /// squares | power:<d> | nlogk:<K> | file:<path>
    #[arg(long)]
    seq: String,
    /// Number of terms (required for generated sequences; a prefix for files).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the terms of a sequence.
    Seq(SeqArgs),
    /// Fractional parts {a_n α}.
    Frac {
        #[command(flatten)]
        seq: SeqArgs,
        /// p/q, a decimal literal, or random:<seed>.
        #[arg(long)]
        alpha: String,
    },
    /// R₂(s, α, N) for one α and one or more s.
    Paircorr {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        alpha: String,
        /// Comma-separated list of s.
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        /// Also run the quadratic oracle and fail on disagreement.
        #[arg(long)]
        check: bool,
    },
    /// Mean and variance of R₂ over random α.
    Variance {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        /// Number of α samples.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Additive energy E(A_N).
    Energy {
        #[command(flatten)]
        seq: SeqArgs,
        /// Add the column E (log N)^C / N³.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = EnergyPath::Auto)]
        method: EnergyPath,
    },
    /// GCD sum of the positive difference weights of A_N (or of its indicator).
    Gcdsum {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<f64>,
        /// Use f = 1 on the terms instead of the difference weights.
        #[arg(long)]
        indicator: bool,
        #[arg(long, value_enum, default_value_t = GcdPath::Auto)]
        method: GcdPath,
    },
    /// Exact truncated moments of the random Euler product against the moment bound.
    ZetaMoments {
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<f64>,
        /// Prime cut-off P.
        #[arg(long)]
        p: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        l: Vec<u32>,
        /// Monte Carlo samples for context (0 skips the estimate).
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Required when --samples > 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Also check the per-prime bounds for primes up to this limit.
        #[arg(long)]
        per_prime_limit: Option<u64>,
    },
    /// Monte Carlo E|D ζ|² against ζ_P(2σ) S_f(σ), with f = 1 on the terms.
    ZetaIdentity {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Also compare E|D|⁴ with the product count.
        #[arg(long)]
        fourth: bool,
        /// Fail when |z| exceeds this.
        #[arg(long, default_value_t = 4.0)]
        max_z: f64,
    },
    /// Constants and lemma checks.
    Verify {
        #[arg(value_enum, default_value_t = VerifyTarget::All)]
        target: VerifyTarget,
        /// Nodes per grid dimension.
        #[arg(long, default_value_t = core::DEFAULT_GRID_NODES)]
        nodes: usize,
    },
    /// Variance, difference-set GCD sum and their ratio over a grid of N.
    Pipeline {
        #[arg(long)]
        seq: String,
        /// Comma-separated increasing prefix lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnergyPath {
    Auto,
    Sums,
    Fft,
    /// Every path; fails unless all agree.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GcdPath {
    Auto,
    Naive,
    Sieve,
    /// Both; fails unless they agree to 1e-9 relative.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyTarget {
    All,
    Constants,
    Lemmas,
}

/// Bad flags or flag combinations; exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// A check ran and failed; exit status 1 after the report is written.
struct Outcome {
    report: Report,
    failures: Vec<String>,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self {
            report,
            failures: Vec::new(),
        }
    }
}

fn parse_seq(args: &SeqArgs) -> anyhow::Result<IntegerSequence> {
    let spec = args.seq.trim();
    let need_n = || args.n.ok_or_else(|| usage(format!("--n is required for --seq {spec}")));
    let seq = if spec == "squares" {
        core::gen_power(2, need_n()?)?
    } else if let Some(d) = spec.strip_prefix("power:") {
        let d: u32 = d
            .parse()
            .map_err(|_| usage(format!("bad power exponent in {spec:?}")))?;
        core::gen_power(d, need_n()?)?
    } else if let Some(k) = spec.strip_prefix("nlogk:") {
        let k: f64 = k.parse().map_err(|_| usage(format!("bad K in {spec:?}")))?;
        core::gen_nlogk(k, need_n()?)?
    } else if let Some(path) = spec.strip_prefix("file:") {
        let seq = core::load_sequence(path)?;
        match args.n {
            Some(n) => seq.prefix(n)?,
            None => seq,
        }
    } else {
        return Err(usage(format!(
            "unknown sequence {spec:?}; expected squares, power:<d>, nlogk:<K> or file:<path>"
        )));
    };
    if seq.is_empty() {
        return Err(usage("the sequence has no terms"));
    }
    Ok(seq)
}

fn small_terms(seq: &IntegerSequence) -> anyhow::Result<&[u64]> {
    seq.as_u64()
        .ok_or_else(|| anyhow::anyhow!("SizeError: sequence terms exceed 64 bits"))
}

fn cmd_seq(args: &SeqArgs) -> anyhow::Result<Outcome> {
    let seq = parse_seq(args)?;
    let mut t = Table::new(&["index", "value"]);
    for (i, v) in seq.terms().iter().enumerate() {
        t.push(vec![(i + 1).into(), Cell::Int(v.to_string())]);
    }
    Ok(Outcome::ok(Report {
        command: format!("seq {}", seq.label()),
        table: t,
        json: None,
    }))
}

fn points_for(seq_args: &SeqArgs, alpha: &str) -> anyhow::Result<(PointSet, RealParameter)> {
    let seq = parse_seq(seq_args)?;
    let alpha = RealParameter::parse(alpha).map_err(|e| usage(e.to_string()))?;
    let pts = core::frac_parts(&seq, &alpha)?;
    Ok((pts, alpha))
}

fn cmd_frac(seq_args: &SeqArgs, alpha: &str) -> anyhow::Result<Outcome> {
    let (pts, alpha) = points_for(seq_args, alpha)?;
    let mut t = Table::new(&["index", "x", "error_bound"]);
    for (i, x) in pts.points().enumerate() {
        t.push(vec![(i + 1).into(), x.into(), pts.error_bound().into()]);
    }
    Ok(Outcome::ok(Report {
        command: format!("frac {} alpha={alpha}", pts.source()),
        table: t,
        json: None,
    }))
}

fn cmd_paircorr(seq_args: &SeqArgs, alpha: &str, s_list: &[f64], check: bool) -> anyhow::Result<Outcome> {
    let (pts, alpha) = points_for(seq_args, alpha)?;
    let mut t = Table::new(&["s", "n", "pair_count", "value", "boundary_pairs"]);
    let mut failures = Vec::new();
    for &s in s_list {
        let r = core::pair_correlation(&pts, s)?;
        if check {
            let b = core::pair_correlation_brute(&pts, s)?;
            if b != r {
                failures.push(format!(
                    "s={s}: sweep {} pairs, brute force {}",
                    r.pair_count, b.pair_count
                ));
            }
        }
        t.push(vec![
            s.into(),
            r.n.into(),
            r.pair_count.into(),
            r.value.into(),
            r.boundary_pairs.into(),
        ]);
    }
    Ok(Outcome {
        report: Report {
            command: format!("paircorr {} alpha={alpha}", pts.source()),
            table: t,
            json: None,
        },
        failures,
    })
}

fn check_samples(m: usize) -> anyhow::Result<()> {
    if m < 2 {
        return Err(usage(format!("--m must be at least 2, got {m}")));
    }
    Ok(())
}

fn cmd_variance(seq_args: &SeqArgs, s_list: &[f64], m: usize, seed: u64) -> anyhow::Result<Outcome> {
    check_samples(m)?;
    let seq = parse_seq(seq_args)?;
    let mut t = Table::new(&[
        "s",
        "n",
        "samples",
        "seed",
        "mean",
        "variance",
        "target",
        "max_boundary_pairs",
    ]);
    for &s in s_list {
        let v = core::variance_over_alpha(&seq, s, m, seed)?;
        t.push(vec![
            s.into(),
            v.n.into(),
            v.samples.into(),
            v.seed.into(),
            v.mean.into(),
            v.variance.into(),
            v.target.into(),
            v.max_boundary_pairs.into(),
        ]);
    }
    Ok(Outcome::ok(Report {
        command: format!("variance {}", seq.label()),
        table: t,
        json: None,
    }))
}

fn method_name(m: core::EnergyMethod) -> &'static str {
    match m {
        core::EnergyMethod::DenseDifferences => "dense_differences",
        core::EnergyMethod::SortedDifferences => "sorted_differences",
        core::EnergyMethod::SumHashing => "sum_hashing",
        core::EnergyMethod::Fft => "fft",
    }
}

fn cmd_energy(seq_args: &SeqArgs, c: Option<f64>, method: EnergyPath, opts: &EnergyOptions) -> anyhow::Result<Outcome> {
    let seq = parse_seq(seq_args)?;
    let reports = match method {
        EnergyPath::Auto => vec![core::additive_energy_with(&seq, opts)?],
        EnergyPath::Sums => vec![core::additive_energy_by_sums(&seq)?],
        EnergyPath::Fft => vec![core::additive_energy_fft(&seq)?],
        EnergyPath::All => vec![
            core::additive_energy_with(&seq, opts)?,
            core::additive_energy_by_sums(&seq)?,
            core::additive_energy_fft(&seq)?,
        ],
    };
    let mut columns = vec!["n", "energy", "lower", "upper", "method"];
    if c.is_some() {
        columns.push("ratio");
    }
    let mut t = Table::new(&columns);
    for r in &reports {
        let mut row: Vec<Cell> = vec![
            r.n.into(),
            r.energy.into(),
            r.lower.into(),
            r.upper.into(),
            method_name(r.method).into(),
        ];
        if let Some(c) = c {
            row.push(r.normalized(c).into());
        }
        t.push(row);
    }
    let failures = if reports.iter().all(|r| r.energy == reports[0].energy) {
        Vec::new()
    } else {
        vec![format!(
            "energy paths disagree: {:?}",
            reports
                .iter()
                .map(|r| (method_name(r.method), r.energy))
                .collect::<Vec<_>>()
        )]
    };
    Ok(Outcome {
        report: Report {
            command: format!("energy {}", seq.label()),
            table: t,
            json: None,
        },
        failures,
    })
}

fn cmd_gcdsum(
    seq_args: &SeqArgs,
    sigmas: &[f64],
    indicator: bool,
    method: GcdPath,
    sieve_limit: u64,
    opts: &EnergyOptions,
) -> anyhow::Result<Outcome> {
    let seq = parse_seq(seq_args)?;
    let f = if indicator {
        WeightedSupport::indicator(small_terms(&seq)?.iter().copied())?
    } else {
        WeightedSupport::from_differences(&seq, opts)?
    };
    let mut t = Table::new(&["sigma", "support_size", "l1_norm", "value", "method"]);
    let mut failures = Vec::new();
    for &sigma in sigmas {
        let values = match method {
            GcdPath::Auto => {
                if f.max_element().is_some_and(|m| m > sieve_limit) {
                    vec![core::gcd_sum_naive(&f, sigma)?]
                } else {
                    vec![core::gcd_sum_sieve(&f, sigma, sieve_limit)?]
                }
            }
            GcdPath::Naive => vec![core::gcd_sum_naive(&f, sigma)?],
            GcdPath::Sieve => vec![core::gcd_sum_sieve(&f, sigma, sieve_limit)?],
            GcdPath::Both => vec![
                core::gcd_sum_naive(&f, sigma)?,
                core::gcd_sum_sieve(&f, sigma, sieve_limit)?,
            ],
        };
        if let [a, b] = values.as_slice() {
            let rel = (a.value - b.value).abs() / a.value.abs().max(b.value.abs());
            if rel.is_nan() || rel > 1e-9 {
                failures.push(format!("sigma={sigma}: naive {} vs sieve {}", a.value, b.value));
            }
        }
        for v in values {
            let name = match v.method {
                core::GcdSumMethod::Naive => "naive",
                core::GcdSumMethod::DivisorSieve => "divisor_sieve",
            };
            t.push(vec![
                sigma.into(),
                v.support_size.into(),
                f.l1_norm().into(),
                v.value.into(),
                name.into(),
            ]);
        }
    }
    Ok(Outcome {
        report: Report {
            command: format!("gcdsum {}{}", seq.label(), if indicator { " indicator" } else { "" }),
            table: t,
            json: None,
        },
        failures,
    })
}

fn cmd_zeta_moments(
    sigmas: &[f64],
    p: u64,
    ls: &[u32],
    samples: usize,
    seed: Option<u64>,
    per_prime_limit: Option<u64>,
) -> anyhow::Result<Outcome> {
    let seed = match (samples, seed) {
        (0, s) => s.unwrap_or(0),
        (1, _) => return Err(usage("--samples must be 0 or at least 2")),
        (_, Some(s)) => s,
        (_, None) => return Err(usage("--seed is required when --samples > 0")),
    };
    let mut t = Table::new(&[
        "l",
        "sigma",
        "prime_limit",
        "exact_log",
        "bound",
        "pass",
        "per_prime_min_margin",
        "mc_mean",
        "mc_stderr",
    ]);
    let mut failures = Vec::new();
    for &sigma in sigmas {
        for &l in ls {
            let cfg = RandomZetaConfig {
                sigma,
                prime_limit: p,
                l,
                samples,
                seed,
            };
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let check = core::moment_bound_check(l, sigma, p)?;
            let mut pass = check.pass;
            let per_prime = match per_prime_limit {
                Some(limit) => {
                    let pp = core::per_prime_bound_check(l, sigma, limit)?;
                    pass &= pp.pass;
                    pp.min_margin
                }
                None => f64::NAN,
            };
            if !pass {
                failures.push(format!("l={l}, sigma={sigma}: moment bound fails"));
            }
            let (mc_mean, mc_stderr) = if samples >= 2 {
                let est = core::moment_estimate(&cfg)?;
                (est.mc_mean, est.mc_stderr)
            } else {
                (f64::NAN, f64::NAN)
            };
            t.push(vec![
                l.into(),
                sigma.into(),
                p.into(),
                check.exact_log.into(),
                check.bound.into(),
                pass.into(),
                per_prime.into(),
                mc_mean.into(),
                mc_stderr.into(),
            ]);
        }
    }
    Ok(Outcome {
        report: Report {
            command: "zeta-moments".into(),
            table: t,
            json: None,
        },
        failures,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_zeta_identity(
    seq_args: &SeqArgs,
    sigma: f64,
    p: u64,
    samples: usize,
    seed: u64,
    fourth: bool,
    max_z: f64,
) -> anyhow::Result<Outcome> {
    check_samples(samples)?;
    let seq = parse_seq(seq_args)?;
    let f = WeightedSupport::indicator(small_terms(&seq)?.iter().copied())?;
    let mut t = Table::new(&["quantity", "samples", "mc_mean", "mc_stderr", "exact", "z_score"]);
    let mut rows = vec![("identity", core::identity_check(&f, sigma, p, samples, seed)?)];
    if fourth {
        rows.push(("fourth_moment", core::fourth_moment_d(&f, samples, seed, p)?));
    }
    let mut failures = Vec::new();
    for (name, c) in rows {
        if c.z_score.is_nan() || c.z_score.abs() > max_z {
            failures.push(format!("{name}: |z| = {} exceeds {max_z}", c.z_score.abs()));
        }
        t.push(vec![
            name.into(),
            c.samples.into(),
            c.mc_mean.into(),
            c.mc_stderr.into(),
            c.exact.into(),
            c.z_score.into(),
        ]);
    }
    Ok(Outcome {
        report: Report {
            command: format!("zeta-identity {}", seq.label()),
            table: t,
            json: None,
        },
        failures,
    })
}

fn cmd_verify(target: VerifyTarget, nodes: usize) -> anyhow::Result<Outcome> {
    if nodes < 2 {
        return Err(usage("--nodes must be at least 2"));
    }
    let mut t = Table::new(&["check", "value", "pass", "worst_point"]);
    let mut doc = serde_json::Map::new();
    let mut failures = Vec::new();
    if matches!(target, VerifyTarget::All | VerifyTarget::Constants) {
        let c = core::constants_table()?;
        let chain_ok = (c.at_threshold.variance_exponent + 1.0).abs() <= 1e-9;
        let closed_ok = (c.c_threshold - c.c_threshold_closed_form).abs() <= 1e-9;
        let stable = c.beta_precision_gap <= 1e-15 && c.c_threshold_precision_gap <= 1e-15;
        t.push(vec!["beta".into(), c.beta.into(), stable.into(), "".into()]);
        t.push(vec![
            "c_threshold".into(),
            c.c_threshold.into(),
            closed_ok.into(),
            "".into(),
        ]);
        t.push(vec![
            "variance_exponent_at_threshold".into(),
            c.at_threshold.variance_exponent.into(),
            chain_ok.into(),
            "".into(),
        ]);
        for (ok, what) in [
            (stable, "precision stability"),
            (closed_ok, "closed form"),
            (chain_ok, "exponent chain"),
        ] {
            if !ok {
                failures.push(format!("constants: {what}"));
            }
        }
        doc.insert("constants".into(), serde_json::to_value(&c)?);
    }
    if matches!(target, VerifyTarget::All | VerifyTarget::Lemmas) {
        let reports = core::run_lemma_suite(nodes)?;
        for r in &reports {
            let point = |p: &[(String, f64)]| {
                p.iter()
                    .map(|(k, v)| format!("{k}={}", output::format_real(*v)))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            t.push(vec![
                r.lemma_id.clone().into(),
                r.min_margin.into(),
                r.pass.into(),
                point(&r.worst_point).into(),
            ]);
            for a in &r.auxiliary {
                t.push(vec![
                    format!("{}/{}", r.lemma_id, a.name).into(),
                    a.min_margin.into(),
                    a.pass.into(),
                    point(&a.worst_point).into(),
                ]);
            }
            if !r.pass {
                failures.push(format!("lemma {} fails with margin {}", r.lemma_id, r.min_margin));
            }
        }
        doc.insert("lemmas".into(), serde_json::to_value(&reports)?);
    }
    doc.insert("pass".into(), json!(failures.is_empty()));
    Ok(Outcome {
        report: Report {
            command: format!("verify {}", format!("{target:?}").to_lowercase()),
            table: t,
            json: Some(serde_json::Value::Object(doc)),
        },
        failures,
    })
}

fn cmd_pipeline(
    spec: &str,
    n_grid: &[usize],
    s_list: &[f64],
    m: usize,
    seed: u64,
    sieve_limit: u64,
    opts: &EnergyOptions,
) -> anyhow::Result<Outcome> {
    check_samples(m)?;
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] < 2 {
        return Err(usage("--n-grid must be strictly increasing and start at 2 or more"));
    }
    let n_max = *n_grid.last().expect("nonempty grid");
    let seq = parse_seq(&SeqArgs {
        seq: spec.into(),
        n: Some(n_max),
    })?;
    let mut t = Table::new(&[
        "n", "s", "samples", "seed", "mean", "variance", "target", "gcd_sum", "ratio",
    ]);
    for &n in n_grid {
        let prefix = seq.prefix(n)?;
        let gcd = core::difference_set_gcd_sum(&prefix, 0.5, sieve_limit, opts)?;
        for &s in s_list {
            let v = core::variance_over_alpha(&prefix, s, m, seed)?;
            let nf = n as f64;
            let ratio = v.variance * nf.powi(3) / (nf.ln() * gcd.value);
            t.push(vec![
                n.into(),
                s.into(),
                m.into(),
                seed.into(),
                v.mean.into(),
                v.variance.into(),
                v.target.into(),
                gcd.value.into(),
                ratio.into(),
            ]);
        }
    }
    Ok(Outcome::ok(Report {
        command: format!("pipeline {}", seq.label()),
        table: t,
        json: None,
    }))
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let opts = EnergyOptions {
        pair_budget: cli.pair_budget,
    };
    match &cli.command {
        Command::Seq(args) => cmd_seq(args),
        Command::Frac { seq, alpha } => cmd_frac(seq, alpha),
        Command::Paircorr { seq, alpha, s, check } => cmd_paircorr(seq, alpha, s, *check),
        Command::Variance { seq, s, m, seed } => cmd_variance(seq, s, *m, *seed),
        Command::Energy { seq, c, method } => cmd_energy(seq, *c, *method, &opts),
        Command::Gcdsum {
            seq,
            sigma,
            indicator,
            method,
        } => cmd_gcdsum(seq, sigma, *indicator, *method, cli.sieve_limit, &opts),
        Command::ZetaMoments {
            sigma,
            p,
            l,
            samples,
            seed,
            per_prime_limit,
        } => cmd_zeta_moments(sigma, *p, l, *samples, *seed, *per_prime_limit),
        Command::ZetaIdentity {
            seq,
            sigma,
            p,
            samples,
            seed,
            fourth,
            max_z,
        } => cmd_zeta_identity(seq, *sigma, *p, *samples, *seed, *fourth, *max_z),
        Command::Verify { target, nodes } => cmd_verify(*target, *nodes),
        Command::Pipeline {
            seq,
            n_grid,
            s,
            m,
            seed,
        } => cmd_pipeline(seq, n_grid, s, *m, *seed, cli.sieve_limit, &opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("usage error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let sink = Sink {
        format: cli.format,
        out: cli.out.as_deref(),
        suppress_header: cli.suppress_header,
    };
    if let Err(e) = sink.emit(&outcome.report).with_context(|| {
        format!(
            "writing {}",
            cli.out.as_deref().map_or("stdout".into(), |p| p.display().to_string())
        )
    }) {
        eprintln!("error: IoError: {e:#}");
        return ExitCode::from(1);
    }
    if outcome.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &outcome.failures {
            eprintln!("verification failed: {f}");
        }
        ExitCode::from(1)
    }
}
