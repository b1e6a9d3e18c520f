use std::path::Path;
use std::process::{Command, Output};

fn mppc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mppc"))
        .args(args)
        .env_remove("MPPC_SIEVE_LIMIT")
        .env_remove("MPPC_PAIR_BUDGET")
        .output()
        .expect("run mppc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_all_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = mppc(&[
        "verify",
        "all",
        "--nodes",
        "500",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!((v["constants"]["beta"].as_f64().unwrap() - 1.7032).abs() < 1e-4);
    assert!((v["constants"]["c_threshold"].as_f64().unwrap() - 13.155).abs() < 1e-3);
    assert_eq!(v["lemmas"].as_array().unwrap().len(), 4);
    assert!(v["generated_unix"].is_u64());
}

fn run_to_file(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full = args.to_vec();
    full.extend(["--suppress-header", "--out", path.to_str().unwrap()]);
    let o = mppc(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "pipeline", "--seq", "squares", "--n-grid", "100,200", "--s", "0.5,1", "--m", "20", "--seed", "5",
    ];
    let a = run_to_file(dir.path(), "a.csv", &args);
    let b = run_to_file(dir.path(), "b.csv", &args);
    assert_eq!(a, b);
    let mut one_thread = args.to_vec();
    one_thread.extend(["--threads", "1"]);
    assert_eq!(a, run_to_file(dir.path(), "c.csv", &one_thread));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("n,s,samples,seed,mean,variance,target,gcd_sum,ratio\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn header_line_is_optional() {
    let o = mppc(&["energy", "--seq", "squares", "--n", "10"]);
    let text = stdout(&o);
    assert!(text.starts_with("# mppc "));
    assert!(text.contains("generated_unix="));
    let o = mppc(&["energy", "--seq", "squares", "--n", "10", "--suppress-header"]);
    assert!(stdout(&o).starts_with("n,energy,"));
}

#[test]
fn energy_row_for_squares() {
    let o = mppc(&[
        "energy",
        "--seq",
        "squares",
        "--n",
        "100",
        "--method",
        "all",
        "--suppress-header",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r.starts_with("100,33632,10000,1000000,"), "{r}");
    }
}

#[test]
fn interval_energy_in_json() {
    let o = mppc(&[
        "energy",
        "--seq",
        "power:1",
        "--n",
        "50",
        "--format",
        "json",
        "--suppress-header",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"][0]["energy"], (2 * 50u64.pow(3) + 50) / 3);
}

#[test]
fn paircorr_near_two() {
    let o = mppc(&[
        "paircorr",
        "--seq",
        "squares",
        "--n",
        "1000",
        "--alpha",
        "random:42",
        "--s",
        "1.0",
        "--check",
        "--suppress-header",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let value: f64 = text.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((1.5..2.5).contains(&value), "{value}");
}

#[test]
fn file_sequences_and_frac() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.txt");
    std::fs::write(&path, "# b-file\n1 1\n2 4\n3 9\n").unwrap();
    let spec = format!("file:{}", path.display());
    let o = mppc(&["frac", "--seq", &spec, "--alpha", "1/4", "--suppress-header"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let x: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(
        x,
        ["2.5000000000000000e-1", "0.0000000000000000e0", "2.5000000000000000e-1"]
    );

    std::fs::write(&path, "1\n3\n2\n").unwrap();
    let o = mppc(&["seq", "--seq", &spec]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotIncreasing"));
}

#[test]
fn exit_codes() {
    // Usage errors.
    assert_eq!(
        mppc(&["pipeline", "--seq", "squares", "--n-grid", "10", "--s", "1", "--m", "0", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mppc(&["seq", "--seq", "bogus", "--n", "3"]).status.code(), Some(2));
    assert_eq!(mppc(&["seq", "--seq", "squares"]).status.code(), Some(2));
    assert_eq!(
        mppc(&["variance", "--seq", "squares", "--n", "10", "--s", "1", "--m", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mppc(&["nonsense"]).status.code(), Some(2));
    // Computational errors name the failing module error.
    let o = mppc(&["seq", "--seq", "nlogk:0.5", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DomainError"));
    let o = mppc(&[
        "gcdsum",
        "--seq",
        "squares",
        "--n",
        "10",
        "--sigma",
        "0.5",
        "--method",
        "sieve",
        "--sieve-limit",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SieveLimitError"));
    // Environment overrides.
    let o = Command::new(env!("CARGO_BIN_EXE_mppc"))
        .args(["energy", "--seq", "squares", "--n", "100"])
        .env("MPPC_PAIR_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SizeError"));
}

#[test]
fn verification_failure_exits_one() {
    // An impossible z tolerance forces the Monte Carlo comparison to fail.
    let o = mppc(&[
        "zeta-identity",
        "--seq",
        "power:1",
        "--n",
        "5",
        "--sigma",
        "0.75",
        "--p",
        "5",
        "--samples",
        "100",
        "--seed",
        "3",
        "--max-z",
        "0",
        "--suppress-header",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("verification failed"));
    assert!(stdout(&o).starts_with("quantity,"));
}

#[test]
fn gcdsum_paths_agree() {
    let o = mppc(&[
        "gcdsum",
        "--seq",
        "squares",
        "--n",
        "60",
        "--sigma",
        "0.5,0.6,0.75",
        "--method",
        "both",
        "--suppress-header",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn zeta_moments_rows() {
    let o = mppc(&[
        "zeta-moments",
        "--sigma",
        "0.55,0.7",
        "--p",
        "1000",
        "--l",
        "4",
        "--per-prime-limit",
        "100",
        "--suppress-header",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().skip(1).all(|l| l.contains(",true,")));
    assert_eq!(
        mppc(&["zeta-moments", "--sigma", "0.8", "--p", "100", "--l", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mppc(&[
            "zeta-moments",
            "--sigma",
            "0.6",
            "--p",
            "100",
            "--l",
            "4",
            "--samples",
            "10"
        ])
        .status
        .code(),
        Some(2)
    );
}
