use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ksat(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksat"))
        .args(args)
        .current_dir(dir)
        .env_remove("KSAT_SEED")
        .output()
        .expect("spawn ksat")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// All eight sign patterns over three variables: unsatisfiable.
fn write_unsat(dir: &Path) -> PathBuf {
    let mut text = String::from("p cnf 3 8\n");
    for mask in 0..8 {
        for v in 0..3 {
            let lit = if mask >> v & 1 == 1 { -(v + 1) } else { v + 1 };
            text.push_str(&format!("{lit} "));
        }
        text.push_str("0\n");
    }
    let path = dir.join("unsat.cnf");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn gen_is_deterministic_and_planted_verifies() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "gen", "--mode", "planted", "--n", "16", "--k", "4", "--m", "163", "--seed", "7",
        "--count", "3",
    ];
    let a = ksat(&[&args[..], &["--out", "a"]].concat(), tmp.path());
    let b = ksat(&[&args[..], &["--out", "b"]].concat(), tmp.path());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    for i in 0..3 {
        let stem = format!("planted_n16_k4_s7_{i:04}");
        for ext in ["cnf", "sol"] {
            let x = fs::read(tmp.path().join("a").join(format!("{stem}.{ext}"))).unwrap();
            let y = fs::read(tmp.path().join("b").join(format!("{stem}.{ext}"))).unwrap();
            assert_eq!(x, y);
        }
        let cnf = format!("a/{stem}.cnf");
        let sol = format!("a/{stem}.sol");
        let v = ksat(&["verify", &cnf, &sol], tmp.path());
        assert_eq!(code(&v), 0);
        assert!(stdout(&v).contains("unsatisfied_clauses=0"));
    }
}

#[test]
fn gen_threshold_poisson_clause_counts() {
    let tmp = TempDir::new().unwrap();
    let mut inside = 0;
    for seed in 0..20u64 {
        let out = ksat(
            &[
                "gen",
                "--mode",
                "threshold-poisson",
                "--n",
                "100",
                "--k",
                "4",
                "--seed",
                &seed.to_string(),
            ],
            tmp.path(),
        );
        assert_eq!(code(&out), 0);
        let path = stdout(&out).trim().to_string();
        let text = fs::read_to_string(tmp.path().join(path)).unwrap();
        let header = text.lines().find(|l| l.starts_with("p cnf")).unwrap();
        let m: usize = header.split_whitespace().nth(3).unwrap().parse().unwrap();
        inside += (924..=1124).contains(&m) as usize;
    }
    assert!(inside >= 19);
}

#[test]
fn solve_found_then_verify() {
    let tmp = TempDir::new().unwrap();
    let g = ksat(
        &[
            "gen", "--mode", "planted", "--n", "16", "--k", "4", "--m", "163", "--seed", "1",
        ],
        tmp.path(),
    );
    let cnf = stdout(&g).trim().to_string();
    let s = ksat(
        &[
            "solve",
            &cnf,
            "--alpha-n",
            "4",
            "--k-star",
            "4",
            "--seed",
            "2",
            "--out",
            "r.json",
        ],
        tmp.path(),
    );
    assert_eq!(code(&s), 0, "{}", String::from_utf8_lossy(&s.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&s)).unwrap();
    assert_eq!(json["result"]["outcome"]["status"], "found");
    for key in [
        "samples_used",
        "searches_triggered",
        "promising",
        "clause_evaluations",
        "search_nodes",
    ] {
        assert!(json["result"][key].is_u64(), "{key}");
    }
    let v = ksat(&["verify", &cnf, "r.json"], tmp.path());
    assert_eq!(code(&v), 0);
}

#[test]
fn solve_exit_codes_on_unsat() {
    let tmp = TempDir::new().unwrap();
    let f = write_unsat(tmp.path());
    let f = f.to_str().unwrap();
    // Small-k path with the exhaustive backstop.
    assert_eq!(code(&ksat(&["solve", f], tmp.path())), 1);
    // Sample-and-test path.
    assert_eq!(
        code(&ksat(
            &["solve", f, "--k-star", "3", "--alpha-n", "1"],
            tmp.path()
        )),
        1
    );
    // No backstop and one restart: cannot decide.
    let out = ksat(
        &["solve", f, "--restarts", "1", "--brute-force-bound", "0"],
        tmp.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("inconclusive"));
    // Structural error.
    assert_eq!(code(&ksat(&["solve", "missing.cnf"], tmp.path())), 3);
}

#[test]
fn verify_rejects_wrong_assignment() {
    let tmp = TempDir::new().unwrap();
    let f = write_unsat(tmp.path());
    fs::write(tmp.path().join("a.txt"), "010\n").unwrap();
    let out = ksat(&["verify", f.to_str().unwrap(), "a.txt"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("unsatisfied_clauses=1"));
}

#[test]
fn config_file_with_flag_precedence_and_env_seed() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("gen.conf"),
        "mode = fixed-m\nn = 10\nk = 3\nm = 30\nseed = 5\n",
    )
    .unwrap();
    let a = ksat(&["--config", "gen.conf", "gen", "--out", "a"], tmp.path());
    assert_eq!(stdout(&a).trim(), "a/fixed-m_n10_k3_s5_0000.cnf");
    let b = ksat(
        &[
            "--config", "gen.conf", "gen", "--seed", "6", "--n", "12", "--out", "a",
        ],
        tmp.path(),
    );
    assert_eq!(stdout(&b).trim(), "a/fixed-m_n12_k3_s6_0000.cnf");

    let env = Command::new(env!("CARGO_BIN_EXE_ksat"))
        .args([
            "gen", "--mode", "fixed-m", "--n", "10", "--k", "3", "--m", "30", "--out", "a",
        ])
        .current_dir(tmp.path())
        .env("KSAT_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(stdout(&env).trim(), "a/fixed-m_n10_k3_s11_0000.cnf");

    fs::write(tmp.path().join("bad.conf"), "nn = 10\n").unwrap();
    assert_eq!(code(&ksat(&["--config", "bad.conf", "gen"], tmp.path())), 3);
}

#[test]
fn validate_writes_reports() {
    let tmp = TempDir::new().unwrap();
    let out = ksat(
        &[
            "validate",
            "expected-count",
            "--seeds",
            "200",
            "--seed",
            "3",
            "--out",
            "rep",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let csv = fs::read_to_string(tmp.path().join("rep/expected-count.csv")).unwrap();
    assert!(csv.starts_with("suite,seed,name,observed,expected,tolerance,passed,detail"));
    assert!(tmp.path().join("rep/expected-count.json").exists());

    let out = ksat(
        &[
            "validate",
            "histogram",
            "--reference-regime",
            "--seeds",
            "2",
            "--out",
            "rep",
        ],
        tmp.path(),
    );
    assert!(
        tmp.path().join("rep/histogram_counts.csv").exists(),
        "{}",
        stdout(&out)
    );

    assert_eq!(code(&ksat(&["validate", "no-such-suite"], tmp.path())), 3);
    assert_eq!(code(&ksat(&["solve", "--no-such-flag"], tmp.path())), 3);
    assert_eq!(code(&ksat(&["--help"], tmp.path())), 0);
}

#[test]
fn validate_reports_failure() {
    let tmp = TempDir::new().unwrap();
    // A threshold above m admits no positives at all.
    let out = ksat(
        &["validate", "rates", "--threshold", "1000", "--seeds", "2"],
        tmp.path(),
    );
    assert_eq!(code(&out), 1, "{}", stdout(&out));
}

#[test]
fn bench_csv_rows() {
    let tmp = TempDir::new().unwrap();
    let out = ksat(
        &[
            "bench",
            "--n-min",
            "10",
            "--n-max",
            "12",
            "--instances",
            "2",
            "--alpha-n",
            "3",
            "--k-star",
            "4",
            "--seed",
            "4",
            "--out",
            "b.csv",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(tmp.path().join("b.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    for col in [
        "n",
        "seed",
        "mode",
        "samples_used",
        "searches_triggered",
        "clause_evaluations",
        "predicted_scans",
        "wall_ms",
    ] {
        assert!(headers.iter().any(|h| h == col), "{col}");
    }
    assert_eq!(r.records().count(), 2 * 2 * 2);
}
