//! End-to-end checks of the command-line surface: exit codes, error
//! reporting, and output determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treeclone"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!(
        "treeclone-cli-test-{}-{}",
        std::process::id(),
        name
    ));
    fs::write(&path, contents).expect("write temp file");
    path
}

fn corpus_file(name: &str, args: &[&str]) -> PathBuf {
    let mut all = vec!["corpus", name];
    all.extend_from_slice(args);
    let out = run(&all);
    assert!(out.status.success(), "corpus {} failed", name);
    temp_file(&format!("{}.dfta", name), &stdout(&out))
}

#[test]
fn eval_and_member_report_states_and_exit_codes() {
    let exists = corpus_file("exists", &[]);
    let exists = exists.to_str().unwrap();

    let out = run(&["eval", exists, "0_2(1_0,0_0)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "eval: qT\n");

    let out = run(&["member", exists, "1_0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "member: yes\n");

    let out = run(&["member", exists, "0_2(0_0,0_0)"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "member: no\n");
}

#[test]
fn parse_errors_exit_with_code_two_and_name_the_token() {
    let exists = corpus_file("exists", &[]);
    let out = run(&["eval", exists.to_str().unwrap(), "0_2(1_0)"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("arity mismatch"), "stderr: {}", err);

    let bad = temp_file("bad.dfta", "alphabet: a/0\nstates: p\nfinal:\n");
    let out = run(&["min", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("missing transition"), "stderr: {}", err);

    let out = run(&["eval", "/nonexistent/file.dfta", "1_0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["corpus", "no_such_language"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn min_produces_canonical_two_state_automaton() {
    let exists = corpus_file("exists", &[]);
    let out = run(&["min", exists.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("states: q0 q1"), "{}", text);
    // minimizing the canonical output is a fixpoint
    let min1 = temp_file("exists-min.dfta", &text);
    let out2 = run(&["min", min1.to_str().unwrap()]);
    assert_eq!(stdout(&out2), text);
}

#[test]
fn check_verbose_adds_tables() {
    let exists = corpus_file("exists", &[]);
    let plain = run(&["check", "ex", exists.to_str().unwrap()]);
    let verbose = run(&["check", "ex", exists.to_str().unwrap(), "--verbose"]);
    assert_eq!(plain.status.code(), Some(1));
    assert_eq!(verbose.status.code(), Some(1));
    let p = stdout(&plain);
    let v = stdout(&verbose);
    assert!(
        p.contains("witness: e=") && !p.contains("e=0_2(v1,0_0)["),
        "{}",
        p
    );
    assert!(v.contains("e=0_2(v1,0_0)["), "{}", v);
}

#[test]
fn equal_distinguishes_languages() {
    let exists = corpus_file("exists", &[]);
    let mod20 = corpus_file("modcount", &["2", "0"]);
    let out = run(&["equal", exists.to_str().unwrap(), exists.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["equal", exists.to_str().unwrap(), mod20.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bool_complement_flips_membership() {
    let exists = corpus_file("exists", &[]);
    let out = run(&["bool", "complement", exists.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let co = temp_file("exists-co.dfta", &stdout(&out));
    let out = run(&["member", co.to_str().unwrap(), "0_2(0_0,0_0)"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["member", co.to_str().unwrap(), "1_0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn psv_member_inconclusive_exits_three() {
    let exists = corpus_file("exists", &[]);
    let mod2 = corpus_file("modcount", &["2", "0"]);
    let out = run(&[
        "psv-member",
        mod2.to_str().unwrap(),
        exists.to_str().unwrap(),
        "--max-power",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("inconclusive-if-false"));
}

#[test]
fn corpus_reference_preclones_emit_dumps() {
    let out = run(&[
        "corpus",
        "t_p",
        "3",
        "--emit",
        "preclone",
        "--max-rank",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("rank 0:")).count(), 3);
    // automaton emission is refused for reference preclones
    let out = run(&["corpus", "t_p", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_and_text_agree_and_runs_are_byte_identical() {
    let exists = corpus_file("exists", &[]);
    let path = exists.to_str().unwrap();
    for args in [
        vec!["check", "ex", path],
        vec!["check", "fosucc", path],
        vec!["synt", path],
        vec!["min", path],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "text runs differ for {:?}", args);
        let mut jargs = args.clone();
        jargs.push("--json");
        let ja = run(&jargs);
        let jb = run(&jargs);
        assert_eq!(ja.stdout, jb.stdout, "json runs differ for {:?}", args);
        let value: serde_json::Value = serde_json::from_slice(&ja.stdout).expect("valid json");
        assert!(value.get("verb").is_some());
        assert!(value.get("timings").is_some());
        assert!(
            value["timings"].is_null(),
            "timings stay null unless requested"
        );
        // verdict agreement between the two formats
        if args[0] == "check" {
            let text = String::from_utf8(a.stdout.clone()).unwrap();
            let text_verdict = if text.contains(": yes") { "yes" } else { "no" };
            assert_eq!(value["verdict"], text_verdict);
            assert_eq!(a.status.code(), ja.status.code());
        }
    }
}
