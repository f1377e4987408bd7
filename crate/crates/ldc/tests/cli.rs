//! The `ldc` binary: exit codes, report headers and structured output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(rel).display().to_string()
}

fn ldc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldc")).args(args).env_remove("LDC_FUEL").output().expect("spawn ldc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("ldc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn join_term_checks_at_bottom() {
    let o = ldc(&["check", &corpus("c1.ldc"), "--algebra", "lattice:diamond", "--grade", "L"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("# ldc check algebra=lattice:diamond"));
    assert!(out.contains("accepted:"));
}

#[test]
fn unfair_derivation_is_rejected_with_exit_one() {
    let o = ldc(&["--algebra", "lin3", "check", &corpus("progs/unfair.ldc"), "--grade", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("rejected:"));
}

#[test]
fn expected_type_overrides_the_file() {
    let f = temp("id.ldc", r"\^1 x:Unit. x");
    let ok = ldc(&["check", &f, "--expected", "{}^1 Unit -> Unit"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = ldc(&["check", &f, "--expected", "{}^2 Unit -> Unit"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn heap_run_reports_structured_successor() {
    let o = ldc(&["heap", &corpus("heaps/x1true.hp"), &corpus("progs/var.ldc"), "--grade", "1", "--format", "structured"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["header"], "heap");
    assert_eq!(lines[1]["result"], "value");
    assert_eq!(lines[1]["heap"][0]["grade"], "0");
}

#[test]
fn heap_run_without_resources_is_stuck() {
    let o = ldc(&["heap", &corpus("heaps/x0true.hp"), &corpus("progs/var.ldc"), "--grade", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_reaches_a_value() {
    let f = temp("beta.ldc", r"(\^1 x:Unit. x) unit ^1");
    let o = ldc(&["eval", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("value after 1 steps: unit"));
}

#[test]
fn fuel_comes_from_the_environment() {
    let f = temp("beta2.ldc", r"(\^1 x:Unit. x) unit ^1");
    let o = Command::new(env!("CARGO_BIN_EXE_ldc")).args(["eval", &f]).env("LDC_FUEL", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ldc(&["check", "/nonexistent/file.ldc"]).status.code(), Some(2));
    let f = temp("bad.ldc", r"\x. (");
    let o = ldc(&["check", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected a term"));
    assert_eq!(ldc(&["--algebra", "nope", "check", &f]).status.code(), Some(2));
}

#[test]
fn m3_lists_every_distributivity_witness() {
    let o = ldc(&["algebra", "verify", "lattice:m3", "--all-witnesses"]);
    let out = stdout(&o);
    assert!(out.contains("distributive-join-over-meet"));
    assert!(out.contains("witness (l1, l3, l2): lhs = l2, rhs = top"));
    assert!(out.lines().filter(|l| l.trim_start().starts_with("witness")).count() > 2);
}

#[test]
fn lnl_corpus_translates_and_checks() {
    for f in ["lnl/judgments.lnl", "lnl/beta.lnl"] {
        let o = ldc(&["translate-lnl", &corpus(f)]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", stdout(&o));
        assert!(!stdout(&o).contains("rejected"));
    }
}

#[test]
fn small_oracle_audit_is_clean() {
    let o = ldc(&["oracle", "--algebra", "lin3", "--max-size", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 soundness divergences"));
}

#[test]
fn oracle_decides_a_single_judgment() {
    let f = temp("dup.ldc", r"\^1 x:Unit. (x^1, x) : {}^1 Unit -> {}^1 Unit & Unit");
    let o = ldc(&["oracle", &f, "--grade", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not derivable"));
}
