//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use mppc_core::*;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn constants() -> Outcome {
    let b = compute_beta();
    ensure((b - 1.7032).abs() <= 1e-4, format!("beta = {b}"))?;
    let c = solve_c_threshold();
    ensure((c - 13.155).abs() <= 1e-3, format!("C* = {c}"))?;
    let chain = variance_exponent(c).map_err(|e| e.to_string())?;
    ensure(
        (chain.variance_exponent + 1.0).abs() <= 1e-9,
        format!("variance exponent at C* = {}", chain.variance_exponent),
    )?;
    Ok(format!(
        "beta = {b:.10}, C* = {c:.10}, variance exponent = {:.3e} + (-1)",
        chain.variance_exponent + 1.0
    ))
}

fn lemma_suite() -> Outcome {
    let reports = run_lemma_suite(DEFAULT_GRID_NODES).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for r in &reports {
        ensure(r.pass, format!("{} failed: {r:?}", r.lemma_id))?;
        ensure(
            r.min_margin >= -1e-12,
            format!("{} margin {}", r.lemma_id, r.min_margin),
        )?;
        parts.push(format!("{} {:.3e}", r.lemma_id, r.min_margin));
    }
    Ok(format!("min margins: {}", parts.join(", ")))
}

fn moment_bound() -> Outcome {
    let mut worst_slack = f64::INFINITY;
    let mut worst_per_prime = f64::INFINITY;
    for l in 4..=8 {
        for sigma in [0.55, 0.6, 0.65, 0.7] {
            let m = moment_bound_check(l, sigma, 100_000).map_err(|e| e.to_string())?;
            ensure(m.pass, format!("moment bound fails: {m:?}"))?;
            worst_slack = worst_slack.min(m.bound - m.exact_log);
            let p = per_prime_bound_check(l, sigma, 10_000).map_err(|e| e.to_string())?;
            ensure(p.pass, format!("per-prime bound fails: {p:?}"))?;
            worst_per_prime = worst_per_prime.min(p.min_margin);
        }
    }
    Ok(format!(
        "20 (l, sigma) pairs; smallest slack {worst_slack:.4}, smallest per-prime margin {worst_per_prime:.3e}"
    ))
}

fn gcd_cross_validation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6364);
    let sigmas = [0.5, 0.6, 0.75];
    let mut worst = 0.0f64;
    let mut worst_dilation = 0.0f64;
    for trial in 0..100 {
        let size = 1 + (rng.next_u64() % 500) as usize;
        let pairs: Vec<(u64, f64)> = (0..size)
            .map(|_| {
                let n = 1 + rng.next_u64() % 1_000_000;
                let w = 0.01 + (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                (n, w)
            })
            .collect();
        let f = WeightedSupport::new(pairs).map_err(|e| e.to_string())?;
        let sigma = sigmas[trial % 3];
        let naive = gcd_sum_naive(&f, sigma).map_err(|e| e.to_string())?.value;
        let sieve = gcd_sum_sieve(&f, sigma, 1_000_000).map_err(|e| e.to_string())?.value;
        let d = rel_diff(naive, sieve);
        worst = worst.max(d);
        ensure(d <= 1e-9, format!("trial {trial}: naive {naive} vs sieve {sieve}"))?;
        let lambda = 1 + rng.next_u64() % 1000;
        let dilated = gcd_sum_naive(&f.dilated(lambda).map_err(|e| e.to_string())?, sigma)
            .map_err(|e| e.to_string())?
            .value;
        let dd = rel_diff(naive, dilated);
        worst_dilation = worst_dilation.max(dd);
        ensure(
            dd <= 1e-10,
            format!("trial {trial}: dilation by {lambda} moves {naive} to {dilated}"),
        )?;
    }
    Ok(format!(
        "100 supports; worst naive/sieve {worst:.2e}, worst dilation {worst_dilation:.2e}"
    ))
}

fn brute_energy(a: &[u64]) -> u128 {
    let mut count = 0u128;
    for &x in a {
        for &y in a {
            for &z in a {
                for &w in a {
                    if x + y == z + w {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

fn energy_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x656e);
    for trial in 0..200 {
        let mask = rng.next_u64() & ((1 << 30) - 1);
        let a: Vec<u64> = (1..=30).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        if a.is_empty() {
            continue;
        }
        let seq = IntegerSequence::from_u64(a.clone(), "subset").map_err(|e| e.to_string())?;
        let e = additive_energy(&seq).map_err(|e| e.to_string())?.energy;
        ensure(e == brute_energy(&a), format!("trial {trial}: {a:?} gave {e}"))?;
    }
    for n in 1..=50u128 {
        let seq = gen_power(1, n as usize).map_err(|e| e.to_string())?;
        let e = additive_energy(&seq).map_err(|e| e.to_string())?.energy;
        ensure(e == (2 * n * n * n + n) / 3, format!("E([1..{n}]) = {e}"))?;
    }
    for n in 1..=40u32 {
        let seq = IntegerSequence::from_u64((0..n).map(|k| 1u64 << k).collect(), "powers of two")
            .map_err(|e| e.to_string())?;
        let e = additive_energy(&seq).map_err(|e| e.to_string())?.energy;
        let n = n as u128;
        ensure(e == 2 * n * n - n, format!("Sidon prefix {n}: {e}"))?;
    }
    let seq = IntegerSequence::from_u64(vec![1, 2, 3], "123").map_err(|e| e.to_string())?;
    let r = representation_function(&seq, DifferenceDomain::PositiveDifferences).map_err(|e| e.to_string())?;
    let m = fourth_moment_multiplicative(&r).map_err(|e| e.to_string())?;
    ensure(m == 33, format!("fourth moment of {{1,2,3}} differences = {m}"))?;
    Ok("200 random subsets, intervals N <= 50, Sidon prefixes N <= 40, fourth moment 33".into())
}

fn identity() -> Outcome {
    let f = WeightedSupport::indicator(1..=20).map_err(|e| e.to_string())?;
    let id = identity_check(&f, 0.75, 19, 100_000, 2024).map_err(|e| e.to_string())?;
    ensure(id.z_score.abs() <= 4.0, format!("identity: {id:?}"))?;
    let fm = fourth_moment_d(&f, 100_000, 2025, 19).map_err(|e| e.to_string())?;
    ensure(fm.z_score.abs() <= 4.0, format!("fourth moment: {fm:?}"))?;
    Ok(format!(
        "identity mc {:.6} vs exact {:.6} (z = {:.2}); fourth moment mc {:.1} vs exact {:.1} (z = {:.2})",
        id.mc_mean, id.exact, id.z_score, fm.mc_mean, fm.exact, fm.z_score
    ))
}

fn ppc_convergence() -> Outcome {
    let n = 10_000;
    let seq = gen_power(2, n).map_err(|e| e.to_string())?;
    let v = variance_over_alpha(&seq, 1.0, 50, 7).map_err(|e| e.to_string())?;
    ensure((1.8..=2.2).contains(&v.mean), format!("mean R2 = {}", v.mean))?;
    let lattice = lattice_points(n).map_err(|e| e.to_string())?;
    for s in [0.5, 1.5, 2.5] {
        let r = pair_correlation(&lattice, s).map_err(|e| e.to_string())?;
        ensure(r.value == 2.0 * f64::floor(s), format!("lattice R2({s}) = {}", r.value))?;
    }
    Ok(format!(
        "mean R2 = {:.4} over 50 alphas; lattice exact at s = 0.5, 1.5, 2.5",
        v.mean
    ))
}

fn growth_monitoring() -> Outcome {
    let seq = gen_nlogk(3.0, 10_000).map_err(|e| e.to_string())?;
    let rows = energy_growth_profile(&seq, &[2000, 5000, 10_000], 2.0).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    ensure(lo > 0.0 && hi / lo <= 10.0, format!("ratios {ratios:?}"))?;
    Ok(format!("E(log N)^2/N^3 = {ratios:.4?}, spread {:.3}", hi / lo))
}

fn variance_monitoring() -> Outcome {
    let seq = gen_power(2, 2000).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for n in [500, 1000, 2000] {
        let a = seq.prefix(n).map_err(|e| e.to_string())?;
        let v = variance_over_alpha(&a, 1.0, 200, 9).map_err(|e| e.to_string())?;
        let g = difference_set_gcd_sum(&a, 0.5, DEFAULT_SIEVE_LIMIT, &EnergyOptions::default())
            .map_err(|e| e.to_string())?;
        let nf = n as f64;
        let ratio = v.variance * nf.powi(3) / (nf.ln() * g.value);
        ensure(ratio.is_finite() && ratio <= 100.0, format!("N = {n}: ratio {ratio}"))?;
        ratios.push(ratio);
    }
    Ok(format!("Var N^3/(log N S) = {ratios:.4?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("constants", constants),
        ("lemma suite", lemma_suite),
        ("moment bound", moment_bound),
        ("gcd-sum cross-validation", gcd_cross_validation),
        ("energy oracles", energy_oracles),
        ("identity check", identity),
        ("pair correlation convergence", ppc_convergence),
        ("energy growth monitoring", growth_monitoring),
        ("variance/gcd-sum monitoring", variance_monitoring),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
