use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn nooplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nooplab"))
        .args(args)
        .env_remove("NOOPLAB_COLOR")
        .output()
        .expect("binary runs")
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nooplab"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nooplab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn nominal_subtype_query() {
    let o = nooplab(&["subtype", "--mode", "nominal", "point-binary", "ColorPoint", "Point"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ColorPoint <: Point : true\n");
}

#[test]
fn structural_subtype_query_prints_canonical_forms() {
    let o = nooplab(&["subtype", "--mode", "structural", "point-binary", "ColorPoint", "Point"]);
    assert_eq!(code(&o), 1);
    assert_eq!(
        stdout(&o),
        "ColorPoint <: Point : false\n\
         ColorPoint = μX.{color: {}, x: {}, y: {}; eq(X): X}\n\
         Point = μX.{x: {}, y: {}; eq(X): X}\n"
    );
}

#[test]
fn subtype_with_unknown_class_is_a_diagnostic() {
    let o = nooplab(&["subtype", "point-binary", "Nope", "Point"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("SYN005"));
}

#[test]
fn subtype_needs_two_classes() {
    let o = nooplab(&["subtype", "point-binary", "Point"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).to_lowercase().contains("usage"));
}

#[test]
fn check_reports_ok_and_main_type() {
    let o = nooplab(&["check", "point-binary"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "OK (main : Point)\n");
    let o = nooplab(&["check", "--mode", "structural", "twins"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "OK (main : μX.{v: {}; me(): X})\n");
}

#[test]
fn check_structural_rejects_casts() {
    let o = nooplab(&["check", "--mode", "structural", "downcast"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("error[STR004]"));
}

#[test]
fn parse_errors_carry_position() {
    let path = temp_file("broken.moo", "class A {\n  Object f\n}\n");
    let o = nooplab(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("error[SYN001]: 3:1"), "{}", stderr(&o));
}

#[test]
fn files_and_stdin_are_accepted() {
    let src = "class A { A me() { return this; } } new A().me()";
    let path = temp_file("a.moo", src);
    let o = nooplab(&["run", path.to_str().unwrap()]);
    assert_eq!((code(&o), stdout(&o)), (0, "A{}\n".to_owned()));
    let o = with_stdin(&["run", "-"], src);
    assert_eq!((code(&o), stdout(&o)), (0, "A{}\n".to_owned()));
}

#[test]
fn missing_input_is_a_diagnostic() {
    let o = nooplab(&["check", "/definitely/not/here.moo"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("neither a readable file nor a built-in corpus program"));
}

#[test]
fn run_prints_named_and_erased_results() {
    let o = nooplab(&["run", "point-binary"]);
    assert_eq!(stdout(&o), "Point{x=Object{}, y=Object{}}\n");
    let o = nooplab(&["run", "point-binary", "--erase"]);
    assert_eq!(stdout(&o), "{x={}, y={}}\n");
    let o = nooplab(&["run", "typetest"]);
    assert_eq!(stdout(&o), "True{}\n");
}

#[test]
fn run_failures_exit_one() {
    let o = nooplab(&["run", "downcast"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("CastError"));
    let o = nooplab(&["run", "diverge", "--steps", "500"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("Timeout"));
}

#[test]
fn run_checks_before_evaluating() {
    let src = "class A { Object f; } new A(new Object()).g()";
    let o = with_stdin(&["run", "-"], src);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("NOM001"));
    let o = with_stdin(&["run", "--unchecked", "-"], src);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("MemberNotFound"));
}

#[test]
fn run_without_main_is_a_diagnostic() {
    let o = with_stdin(&["run", "-"], "class A {}");
    assert_eq!(code(&o), 2);
}

#[test]
fn audit_json_matches_golden_file() {
    let o = nooplab(&["audit", "point-binary", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let golden = include_str!("fixtures/point-binary.audit.json");
    assert_eq!(stdout(&o), golden);
}

#[test]
fn audit_ignores_mode_and_is_deterministic() {
    let a = nooplab(&["audit", "chain3", "--mode", "structural"]);
    let b = nooplab(&["audit", "chain3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn audit_color_follows_the_environment() {
    let plain = nooplab(&["audit", "twins"]);
    assert!(!stdout(&plain).contains('\x1b'));
    let colored = Command::new(env!("CARGO_BIN_EXE_nooplab"))
        .args(["audit", "twins"])
        .env("NOOPLAB_COLOR", "1")
        .output()
        .unwrap();
    assert!(stdout(&colored).contains("\x1b[32m"));
}

#[test]
fn audit_of_ill_typed_program_is_a_diagnostic() {
    let o = nooplab(&["audit", "point-binary-narrowed"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("NOM004"));
}

#[test]
fn dump_signatures_is_json() {
    let o = nooplab(&["dump-signatures", "chain3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let classes = v["classes"].as_array().unwrap();
    let c = classes.iter().find(|c| c["name"] == "C").unwrap();
    assert_eq!(c["super"], serde_json::json!(["B"]));
    assert_eq!(c["methods"][0]["label"], "id");
    assert_eq!(c["methods"][0]["params"], serde_json::json!(["A"]));
}

#[test]
fn corpus_list_and_show() {
    let o = nooplab(&["corpus", "list"]);
    assert_eq!(code(&o), 0);
    for name in ["point-binary", "twins", "spurious", "chain3", "mutual", "downcast"] {
        assert!(stdout(&o).lines().any(|l| l.starts_with(name)), "{name}");
    }
    let o = nooplab(&["corpus", "show", "spurious"]);
    assert!(stdout(&o).contains("class Q"));
    let o = nooplab(&["corpus", "show", "nope"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn help_succeeds() {
    let o = nooplab(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("dump-signatures"));
}
