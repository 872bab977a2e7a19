//! End-to-end checks of the command-line interface, driving the compiled
//! binary the way a user would.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hopoterm")
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

/// Scratch directory unique to one test.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hopoterm-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

const SELF_LOOP: &str = "\
SORTS
  o

SIG
  f : [o] => o

VARS
  x : o

RULES
  f(x) -> f(x)
";

#[test]
fn proves_shuffle_and_exits_zero() {
    let out = run(&["prove", &fixture("shuffle.afs")]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).starts_with("YES"), "stdout: {}", stdout(&out));
}

#[test]
fn orients_a_constraint_problem_through_the_cli() {
    let out = run(&["prove", &fixture("shuffle_static.dp")]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).starts_with("YES"), "stdout: {}", stdout(&out));
}

#[test]
fn json_output_is_machine_readable() {
    let out = run(&["prove", &fixture("map.afs"), "--output", "json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["verdict"], "yes");
    assert_eq!(v["mode"], "rule-removal");
    assert_eq!(v["timed_out"], false);
    assert!(v["rounds"].as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn unprovable_system_reports_maybe() {
    let dir = scratch("loop");
    let path = dir.join("loop.afs");
    std::fs::write(&path, SELF_LOOP).expect("write input");
    let out = run(&["prove", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "stdout: {}", stdout(&out));
    assert!(stdout(&out).starts_with("MAYBE"), "stdout: {}", stdout(&out));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn reads_from_stdin() {
    let mut child = Command::new(bin())
        .args(["prove", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .expect("stdin piped")
        .write_all(std::fs::read_to_string(fixture("shuffle.afs")).unwrap().as_bytes())
        .expect("write stdin");
    let out = child.wait_with_output().expect("binary finishes");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).starts_with("YES"));
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = run(&["prove", "/nonexistent/input.afs"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error:"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_backend_is_a_usage_error() {
    let out = run(&["prove", &fixture("map.afs"), "--backend", "sat4j"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown backend"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["prove", &fixture("map.afs"), "--frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn mode_mismatch_is_a_usage_error() {
    let out = run(&["prove", &fixture("shuffle.afs"), "--mode", "orient"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("needs a constraint problem"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn zero_timeout_exits_with_the_timeout_code() {
    let out = run(&["prove", &fixture("shuffle.afs"), "--timeout", "0"]);
    assert_eq!(code(&out), 3, "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("MAYBE"), "stdout: {}", stdout(&out));
}

#[test]
fn dimacs_backend_writes_cnf_and_map_files() {
    let dir = scratch("dimacs");
    let backend = format!("dimacs:{}", dir.display());
    let out = run(&["prove", &fixture("map.afs"), "--backend", &backend]);
    assert_eq!(code(&out), 1, "stdout: {}", stdout(&out));
    let mut cnf = 0;
    let mut map = 0;
    for entry in std::fs::read_dir(&dir).expect("output dir") {
        let name = entry.expect("entry").file_name().to_string_lossy().into_owned();
        if name.ends_with(".cnf") {
            cnf += 1;
        }
        if name.ends_with(".map") {
            map += 1;
        }
    }
    assert!(cnf > 0, "no DIMACS files written");
    assert_eq!(cnf, map, "every .cnf needs its .map sidecar");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn dump_constraints_traces_to_stderr() {
    let out = run(&["prove", &fixture("map.afs"), "--dump-constraints"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains(">="), "stderr: {}", stderr(&out));
}

#[test]
fn output_is_deterministic() {
    let once = run(&["prove", &fixture("shuffle.afs"), "--deterministic"]);
    let twice = run(&["prove", &fixture("shuffle.afs"), "--deterministic"]);
    assert_eq!(code(&once), 0);
    assert_eq!(stdout(&once), stdout(&twice));
}
