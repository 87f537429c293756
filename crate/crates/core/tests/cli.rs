use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn migo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_migo"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn check_sieve_json() {
    let o = migo(&["check", fixture("sieve.migo").to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["live"], true);
    assert_eq!(v["safe"], true);
    assert_eq!(v["fenced"], true);
    for key in ["k", "states", "transitions", "witness", "millis"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn check_fib_bad_fails() {
    let o = migo(&["check", fixture("fib_bad.migo").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("live: no"));
}

#[test]
fn fence_rejects_reader_writer() {
    let o = migo(&["fence", fixture("unfenced-rw.mgt").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("t1"));
}

#[test]
fn verify_type_system_with_bound() {
    let f = fixture("four-round.mgt");
    assert_eq!(code(&migo(&["verify", f.to_str().unwrap(), "-k", "2"])), 0);
    assert_eq!(code(&migo(&["verify", f.to_str().unwrap(), "-k", "3"])), 1);
}

#[test]
fn input_errors() {
    assert_eq!(code(&migo(&["check", "/nonexistent.migo"])), 3);
    assert_eq!(code(&migo(&["verify", "x.mgt", "-k", "2", "--auto"])), 3);
    assert_eq!(code(&migo(&["bogus"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.migo");
    std::fs::write(&bad, "def in c!<").unwrap();
    assert_eq!(code(&migo(&["check", bad.to_str().unwrap()])), 3);
}

#[test]
fn help_and_version() {
    assert_eq!(code(&migo(&["--help"])), 0);
    assert_eq!(code(&migo(&["--version"])), 0);
}

#[test]
fn infer_writes_equations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fib.mgt");
    let o = migo(&[
        "infer",
        fixture("fib.migo").to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("t0"));
    let o = migo(&["verify", out.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn lts_and_explore() {
    let o = migo(&[
        "lts",
        fixture("not-live.mgt").to_str().unwrap(),
        "-k",
        "2",
        "--dot",
        "-",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("digraph"));
    let o = migo(&[
        "explore",
        fixture("fib3.migo").to_str().unwrap(),
        "--depth",
        "50",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("complete: yes"));
    let o = migo(&["run", fixture("fib3.migo").to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("terminated"));
}
