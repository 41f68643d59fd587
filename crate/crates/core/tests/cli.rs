//! End-to-end runs of the `sparse-iso` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparse_iso::cli::matrix_to_json;
use sparse_iso::random::random_sparse_isometry;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparse-iso"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_iso(dir: &Path, name: &str, n: u32, m: u32, seed: u64) -> String {
    let w = random_sparse_isometry(n, m, 6, &mut ChaCha8Rng::seed_from_u64(seed));
    let p = dir.join(name);
    fs::write(&p, matrix_to_json(&w)).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_verify_audit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_iso(dir.path(), "w.json", 4, 2, 1);
    for method in ["dense", "sparse", "fixed-env", "no-fill-in"] {
        let out = dir.path().join(format!("{method}.json"));
        let trace = dir.path().join(format!("{method}.trace.json"));
        let o = run(&["compile", &input, "--method", method, "--verify", "-o", s(&out), "--trace", s(&trace)]);
        assert!(o.status.success(), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let audit: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.with_extension("audit.json")).unwrap()).unwrap();
        assert!(audit["total"].as_u64().is_some());
        let steps: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
        assert!(steps.as_array().is_some());

        let o = run(&["verify", s(&out), &input]);
        assert!(o.status.success(), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let o = run(&["audit", s(&out), "--json"]);
        assert!(o.status.success());
        let again: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(again["total"], audit["total"]);
    }
}

#[test]
fn state_and_permutation_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("v.json");
    fs::write(&state, r#"{"n": 3, "m": 0, "entries": [[0, 0, 0.6, 0.0], [5, 0, 0.0, 0.8]]}"#).unwrap();
    let out = dir.path().join("v.circ.json");
    let o = run(&["compile", s(&state), "--method", "ssp", "--verify", "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let perm = dir.path().join("p.json");
    fs::write(&perm, r#"{"permutation": [3, 0, 1, 2, 7, 6, 5, 4]}"#).unwrap();
    let out = dir.path().join("p.circ.json");
    let o = run(&["compile", s(&perm), "--method", "perm", "--verify", "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run(&["verify", s(&out), s(&perm)]).status.success());
}

#[test]
fn order_reports_envelopes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_iso(dir.path(), "w.json", 4, 2, 2);
    for strategy in ["identity", "greedy", "greedy-rows", "rows"] {
        let o = run(&["order", &input, "--strategy", strategy]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["rho"].as_array().unwrap().len(), 16);
        assert_eq!(v["sigma"].as_array().unwrap().len(), 4);
        assert!(v["elim"].as_i64().unwrap() <= v["ed_after"].as_i64().unwrap());
        if strategy == "rows" {
            assert!(v["ed_after"].as_i64().unwrap() <= v["ed_before"].as_i64().unwrap());
        }
    }
}

#[test]
fn strategy_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_iso(dir.path(), "w.json", 3, 1, 3);
    let strat = dir.path().join("s.json");
    fs::write(&strat, r#"{"rho": [7, 6, 5, 4, 3, 2, 1, 0], "sigma": [1, 0]}"#).unwrap();
    let out = dir.path().join("c.json");
    let o = run(&[
        "compile", &input, "--strategy", "file", "--strategy-file", s(&strat), "--verify", "-o", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::write(&strat, r#"{"rho": [0, 0, 1, 2, 3, 4, 5, 6], "sigma": [1, 0]}"#).unwrap();
    let o = run(&["compile", &input, "--strategy", "file", "--strategy-file", s(&strat)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let sum = dir.path().join("sum.csv");
    let args = ["bench", "ssp", "--n", "6-8", "--s", "1-2", "--trials", "10", "--seed", "5", "--verify"];
    let o = run(&[&args[..], &["-o", s(&a), "--summary", s(&sum)]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run(&[&args[..], &["-o", s(&b)]].concat()).status.success());
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,s,trial,nnz,cnots,bound");
    assert_eq!(lines.len(), 1 + 3 * 2 * 10);
    assert_eq!(lines[1], "6,1,0,2,".to_string() + lines[1].split(',').nth(4).unwrap() + ",11.9167");
    assert_eq!(fs::read_to_string(&sum).unwrap().lines().count(), 1 + 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["compile", s(&bad)]).status.code(), Some(2));

    let not_iso = dir.path().join("ni.json");
    fs::write(&not_iso, r#"{"n": 1, "m": 0, "entries": [[0, 0, 2.0, 0.0]]}"#).unwrap();
    assert_eq!(run(&["compile", s(&not_iso)]).status.code(), Some(3));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["compile", s(&missing)]).status.code(), Some(1));

    // a valid circuit checked against the wrong matrix
    let w = write_iso(dir.path(), "w.json", 3, 1, 4);
    let other = write_iso(dir.path(), "o.json", 3, 1, 5);
    let out = dir.path().join("c.json");
    assert!(run(&["compile", &w, "-o", s(&out)]).status.success());
    assert_eq!(run(&["verify", s(&out), &other]).status.code(), Some(4));

    assert_eq!(run(&["compile"]).status.code(), Some(2));
}
