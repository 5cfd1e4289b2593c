use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_d3sync");

// 1 -0-> 2 -0-> 3 -0-> 3, and 1 only loops under 1: "00" is the unique D3 word of length 2
const BIN3: &str = r#"{"n": 3, "alphabet": 2, "delta": [[[2], [1]], [[3], [1]], [[3], []]]}"#;
const SELF1: &str = r#"{"n": 1, "alphabet": 2, "delta": [[[1], []]]}"#;
// two permutations: no D3 word at all
const PERMS: &str = r#"{"n": 2, "alphabet": 2, "delta": [[[1], [2]], [[2], [1]]]}"#;
// no symbol defined everywhere
const PARTIAL: &str = r#"{"n": 2, "alphabet": 2, "delta": [[[1], [2]], [[], []]]}"#;

fn d3sync(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("D3SYNC_SOLVER")
        .env_remove("D3SYNC_SOLVER_TIMEOUT_S")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn minlen_reports_length_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let nfa = write(dir.path(), "bin3.json", BIN3);
    let out = d3sync(&["minlen", &nfa, "--l0", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["synchronizing"], true);
    assert_eq!(v["length"], 2);
    assert_eq!(v["witness"], "00");
    let trace: Vec<(u64, String, bool)> = v["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["length"].as_u64().unwrap(), e["status"].as_str().unwrap().to_owned(), e["cached"].as_bool().unwrap()))
        .collect();
    assert_eq!(
        trace,
        [(2, "SAT".into(), false), (1, "UNSAT".into(), false), (2, "SAT".into(), true)]
    );
    assert_eq!(v["queries"], 2);
}

#[test]
fn minlen_variants_and_modes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let nfa = write(dir.path(), "bin3.json", BIN3);
    for variant in ["basic", "forced0"] {
        for mode in ["binary", "linear"] {
            let v = json_of(&d3sync(&["minlen", &nfa, "--variant", variant, "--mode", mode]));
            assert_eq!(v["length"], 2, "{variant} {mode}");
        }
    }
}

#[test]
fn minlen_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let perms = write(dir.path(), "perms.json", PERMS);
    let out = d3sync(&["minlen", &perms]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["synchronizing"], false);
    assert_eq!(v["cap"], 4);

    let partial = write(dir.path(), "partial.json", PARTIAL);
    let out = d3sync(&["minlen", &partial]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["mode"], "linear");
    assert!(v["note"].is_string());

    let bad = write(dir.path(), "bad.json", r#"{"n": 2, "alphabet": 2, "delta": [[[3], []], [[], []]]}"#);
    let out = d3sync(&["minlen", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("out of range"));
    assert_eq!(d3sync(&["minlen", "/nonexistent.json"]).status.code(), Some(2));
    let forced = write(dir.path(), "perms.json", PERMS);
    assert_eq!(d3sync(&["minlen", &forced, "--variant", "forced0"]).status.code(), Some(2));
}

#[test]
fn minlen_emits_decodable_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let nfa = write(dir.path(), "bin3.json", BIN3);
    let cnf_dir = dir.path().join("cnf");
    let out = d3sync(&["minlen", &nfa, "--l0", "2", "--emit-dimacs", cnf_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(&cnf_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["basic_len1.cnf", "basic_len2.cnf"]);
    let text = fs::read_to_string(cnf_dir.join("basic_len2.cnf")).unwrap();
    assert!(text.starts_with("c d3sync encoding\nc states 3\nc length 2\n"));
    // 2 + 9·3 + 3 variables
    assert!(text.contains("\np cnf 32 "));

    // the built-in DIMACS solver answers the emitted file
    let result = dir.path().join("result.txt");
    let solved = d3sync(&["solve", cnf_dir.join("basic_len2.cnf").to_str().unwrap(), result.to_str().unwrap()]);
    assert_eq!(solved.status.code(), Some(10));
    assert!(fs::read_to_string(&result).unwrap().starts_with("SAT\n"));
    let unsat = d3sync(&["solve", cnf_dir.join("basic_len1.cnf").to_str().unwrap()]);
    assert_eq!(unsat.status.code(), Some(20));
    assert_eq!(String::from_utf8_lossy(&unsat.stdout), "UNSAT\n");
}

#[test]
fn encode_prints_the_self_loop_formula() {
    let dir = tempfile::tempdir().unwrap();
    let nfa = write(dir.path(), "self1.json", SELF1);
    let out = d3sync(&["encode", &nfa, "--length", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('c')).collect();
    assert_eq!(body, ["p cnf 4 6", "2 0", "-3 1 2 0", "-3 -1 0", "3 1 -2 0", "4 0", "-4 3 0"]);
}

#[test]
fn external_solver_bridge() {
    let dir = tempfile::tempdir().unwrap();
    let nfa = write(dir.path(), "bin3.json", BIN3);
    let solver = format!("{BIN} solve");
    let out = Command::new(BIN)
        .args(["minlen", &nfa, "--l0", "2"])
        .env("D3SYNC_SOLVER", &solver)
        .env("D3SYNC_SOLVER_TIMEOUT_S", "30")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["witness"], "00");
    assert_eq!(v["solver"], solver);
}

#[cfg(unix)]
#[test]
fn external_solver_failures_are_errors() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let nfa = write(dir.path(), "self1.json", SELF1);
    let script = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        fs::set_permissions(&p, fs::Permissions::from_mode(0o755)).unwrap();
        p.to_str().unwrap().to_owned()
    };
    // claims SAT with the all-false model, which violates the unit clauses
    let liar = script("liar.sh", "echo SAT > \"$2\"; echo '-1 -2 -3 -4 0' >> \"$2\"");
    let slow = script("slow.sh", "sleep 5; echo UNSAT > \"$2\"");
    let mute = script("mute.sh", "exit 0");
    for (solver, timeout, needle) in [
        (liar.as_str(), "10", "falsifies"),
        (slow.as_str(), "0.2", "timeout"),
        (mute.as_str(), "10", "unparseable"),
        ("/no/such/solver", "10", "cannot start"),
    ] {
        let out = Command::new(BIN)
            .args(["minlen", &nfa])
            .env("D3SYNC_SOLVER", solver)
            .env("D3SYNC_SOLVER_TIMEOUT_S", timeout)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2), "{solver}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{solver}: {err}");
    }
    // an UNSAT answer needs no model
    let unsat = script("unsat.sh", "echo UNSAT > \"$2\"");
    let out = Command::new(BIN)
        .args(["minlen", &nfa, "--mode", "linear", "--cap", "2"])
        .env("D3SYNC_SOLVER", &unsat)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_methods() {
    let dir = tempfile::tempdir().unwrap();
    let nfa = write(dir.path(), "bin3.json", BIN3);
    let v = json_of(&d3sync(&["oracle", &nfa]));
    assert_eq!(v["length"], 2);
    assert_eq!(v["witness"], "00");
    let v = json_of(&d3sync(&["oracle", &nfa, "--method", "exhaustive", "--cap", "4"]));
    assert_eq!(v["length"], 2);
    let perms = write(dir.path(), "perms.json", PERMS);
    let out = d3sync(&["oracle", &perms]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out), serde_json::json!({"synchronizing": false}));
}

#[test]
fn gen_writes_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("gen");
    let out = d3sync(&[
        "gen", "--model", "poisson", "--lambda", "1.5", "--n", "6", "--count", "12", "--seed", "4", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let entries = manifest["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 12);
    for e in entries {
        let nfa = d3sync::json::read_nfa(&out_dir.join(e["file"].as_str().unwrap())).unwrap();
        assert_eq!(nfa.states(), 6);
        assert_eq!(e["passes_filter"], nfa.everywhere_defined_symbol().is_some());
    }
    // same seed, same bytes
    let again = dir.path().join("again");
    d3sync(&[
        "gen", "--model", "poisson", "--lambda", "1.5", "--n", "6", "--count", "12", "--seed", "4", "--out",
        again.to_str().unwrap(),
    ]);
    for e in entries {
        let f = e["file"].as_str().unwrap();
        assert_eq!(fs::read(out_dir.join(f)).unwrap(), fs::read(again.join(f)).unwrap());
    }
    let filtered = dir.path().join("filtered");
    d3sync(&[
        "gen", "--model", "uniform", "--n", "8", "--count", "5", "--filtered", "--out", filtered.to_str().unwrap(),
    ]);
    let m: Value = serde_json::from_str(&fs::read_to_string(filtered.join("manifest.json")).unwrap()).unwrap();
    assert!(m["entries"].as_array().unwrap().iter().all(|e| e["passes_filter"] == true));
    assert_eq!(d3sync(&["gen", "--model", "poisson", "--n", "3", "--count", "1", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.json",
        r#"{"model": "poisson", "lambda": 1.0, "n_list": [4, 5, 6], "count_per_n": 10, "variant": "forced0",
            "mode": "binary", "seed": 11, "workers": 3, "solver": "internal"}"#,
    );
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = d3sync(&["experiment", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a");
    let b = run("b");
    for f in ["records.csv", "histograms.json", "fits.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let records = d3sync::campaign::read_records(&a.join("records.csv")).unwrap();
    assert_eq!(records.len(), 30);
    for r in &records {
        assert_eq!(r.min_length, r.oracle_length, "{r:?}");
    }
    let fits: Value = serde_json::from_str(&fs::read_to_string(a.join("fits.json")).unwrap()).unwrap();
    assert_eq!(fits["points"].as_array().unwrap().len(), 3);
    assert!(fits["fit"]["rss"].as_f64().unwrap() >= 0.0);
    let hist: Value = serde_json::from_str(&fs::read_to_string(a.join("histograms.json")).unwrap()).unwrap();
    assert_eq!(hist.as_array().unwrap().len(), 3);
    assert!(a.join("timings.csv").exists());
}
