use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kcl(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcl"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("KCL_THREADS")
        .output()
        .expect("kcl runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).expect("output file")
}

#[test]
fn membership_half_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = kcl(dir.path(), &["membership", "--alpha", "0.5", "--beta", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path().join("witness_table.csv"));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "alpha,beta,function,space,verdict,expected,match");
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].iter().all(|r| r.ends_with(",true")));
    assert!(read(dir.path().join("run_summary.txt")).contains("passed = true"));
}

#[test]
fn membership_zero_two_and_equal_indices() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&kcl(
            dir.path(),
            &["membership", "--alpha", "0", "--beta", "2"]
        )),
        0
    );
    assert_eq!(
        code(&kcl(
            dir.path(),
            &["membership", "--alpha", "1", "--beta", "1"]
        )),
        2
    );
    assert_eq!(
        code(&kcl(
            dir.path(),
            &["membership", "--alpha", "-1", "--beta", "1"]
        )),
        2
    );
}

#[test]
fn growth_writes_one_csv_per_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let o = kcl(dir.path(), &["growth", "--alpha", "0,1,2", "--k", "2..256"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for a in ["0", "1", "2"] {
        let csv = read(dir.path().join(format!("growth_alpha_{a}.csv")));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "alpha,k,norm_estimate,paper_lower_bound,sqrt_variant_bound,fitted_exponent"
        );
        // 8 dyadic radii plus the aggregate row
        assert_eq!(lines.len(), 10);
        assert!(lines[9].starts_with(&format!("{a},aggregate,")));
    }
    let verdicts = read(dir.path().join("critical_point.csv"));
    assert!(verdicts.lines().any(|l| l.starts_with("0,regular,")));
    assert!(verdicts.lines().any(|l| l.starts_with("2,singular,")));
}

#[test]
fn growth_rejects_out_of_range_alpha() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&kcl(dir.path(), &["growth", "--alpha", "3"])), 2);
    assert_eq!(
        code(&kcl(
            dir.path(),
            &["growth", "--alpha", "1", "--k", "16..2"]
        )),
        2
    );
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert_eq!(
            code(&kcl(
                dir.path(),
                &["growth", "--alpha", "0.5,2", "--k", "2..64"]
            )),
            0
        );
        assert_eq!(
            code(&kcl(
                dir.path(),
                &["--seed", "7", "contour", "--n", "16", "--seeds", "2"]
            )),
            0
        );
    }
    for name in [
        "growth_alpha_0.5.csv",
        "growth_alpha_2.csv",
        "critical_point.csv",
        "contour_projection.csv",
        "contour_checks.csv",
        "run_summary.txt",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
}

#[test]
fn verify_single_suites() {
    let dir = tempfile::tempdir().unwrap();
    let o = kcl(dir.path(), &["verify", "--suite", "lemma-6.4"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS lemma-6.4"));
    let o = kcl(
        dir.path(),
        &["verify", "--suite", "thm-2.1", "--n", "32", "--seeds", "10"],
    );
    assert_eq!(code(&o), 0);
    let csv = read(dir.path().join("verify.csv"));
    assert!(csv.starts_with("property,deviation,tolerance,passed\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn verify_all_on_empty_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let o = kcl(
        dir.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "verify",
            "--suite",
            "all",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary = read(dir.path().join("run_summary.txt"));
    assert!(summary.contains("suite.example-5.1 = pass"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[weight]\nepsilon = 1.0\nshape = 2\n").unwrap();
    assert_eq!(
        code(&kcl(
            dir.path(),
            &["--config", bad.to_str().unwrap(), "verify"]
        )),
        2
    );
    fs::write(&bad, "[weight]\nepsilon = -1.0\n").unwrap();
    assert_eq!(
        code(&kcl(
            dir.path(),
            &["--config", bad.to_str().unwrap(), "verify"]
        )),
        2
    );
    assert_eq!(
        code(&kcl(dir.path(), &["verify", "--suite", "lemma-0.0"])),
        2
    );
    assert_eq!(code(&kcl(dir.path(), &["sl", "--cells", "3"])), 2);
    assert_eq!(code(&kcl(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_kcl"))
            .arg("--out")
            .arg(dir.path())
            .args(["verify", "--suite", "lemma-6.1"])
            .env("KCL_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("0")), 2);
    assert_eq!(code(&run("many")), 2);
}

#[test]
fn sturm_liouville_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let o = kcl(
        dir.path(),
        &["sl", "--cells", "1024", "--count", "20", "--points", "8"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let eig = read(dir.path().join("eigenvalues.csv"));
    assert!(eig.starts_with("n,lambda,residual\n"));
    assert_eq!(eig.lines().count(), 41);
    assert!(read(dir.path().join("coefficients.csv")).starts_with("n,lambda,c_n\n"));
    let traj = read(dir.path().join("trajectories.csv"));
    assert!(traj.starts_with("m,norm_S,norm_S_plus,norm_S_minus\n"));
    assert_eq!(traj.lines().count(), 9);
}
