//! End-to-end tests of the `apa` binary: output shapes and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const TRANSFER: &str = "\
states q0 q1 qf
init q0
halt qf
q0 test 2 zero -> qf dec -> q1
q1 inc 1 -> q0
";

const LOOP: &str = "\
states q0 qf
init q0
halt qf
q0 inc 1 -> q0
";

const SINGLE_ATTACK: &str = "\
arg a
arg b
attack a b
init a b
";

fn apa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_file(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn run_prints_the_whole_trace_and_halts() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "transfer.mm", TRANSFER);
    let out = apa(&["run", prog.to_str().unwrap(), "--n2", "3"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let numbered = text
        .lines()
        .filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit()))
        .count();
    assert_eq!(numbered, 8, "expected 8 configurations:\n{text}");
    assert!(text.contains("0: (q0, 0, 3)"));
    assert!(text.contains("7: (qf, 3, 0)"));
    assert!(text.contains("halted after 7 steps"));
}

#[test]
fn malformed_program_line_is_reported_with_its_number() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(
        &dir,
        "bad.mm",
        "states q0 qf\ninit q0\nhalt qf\nq0 bump 1 -> qf\n",
    );
    let out = apa(&["run", prog.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("line 4"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn run_budget_exhaustion_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "loop.mm", LOOP);
    let out = apa(&["run", prog.to_str().unwrap(), "--max-steps", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("budget exhausted after 5 steps"));
}

#[test]
fn check_confirms_the_transfer_instance() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "transfer.mm", TRANSFER);
    let out = apa(&["check", prog.to_str().unwrap(), "--n2", "3"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("confirmed, k=7, apa=14"), "got: {text}");
    assert!(text.contains("final (qf, 3, 0)"), "got: {text}");
}

#[test]
fn check_without_a_halting_run_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "loop.mm", LOOP);
    let out = apa(&["check", prog.to_str().unwrap(), "--budget", "50"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("unknown: no halting run within 50 steps"));
}

#[test]
fn simulate_reports_selections_and_the_transition_count() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "transfer.mm", TRANSFER);
    let out = apa(&["simulate", prog.to_str().unwrap(), "--n2", "2"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("select"), "got: {text}");
    assert!(text.contains("commit"), "got: {text}");
    assert!(
        text.contains("halted: 5 machine steps realized as 10 transitions"),
        "got: {text}"
    );

    let out = apa(&[
        "simulate",
        prog.to_str().unwrap(),
        "--n2",
        "2",
        "--format",
        "keyvalue",
    ]);
    let text = stdout(&out);
    assert!(text.contains("minsky_steps=5"), "got: {text}");
    assert!(text.contains("apa_transitions=10"), "got: {text}");
}

#[test]
fn encode_at_bound_zero_lists_only_the_zero_branch_of_tests() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "transfer.mm", TRANSFER);
    let out = apa(&["encode", prog.to_str().unwrap(), "--bound", "0"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# family 1"), "got: {text}");
    assert!(text.contains("# family 6"), "got: {text}");
    assert!(!text.contains("# family 3"), "got: {text}");
    assert!(!text.contains("# family 5"), "got: {text}");
}

#[test]
fn encode_output_feeds_back_into_the_framework_commands() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "transfer.mm", TRANSFER);
    let out = apa(&["encode", prog.to_str().unwrap(), "--n2", "2", "--bound", "4"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let framework = write_file(&dir, "snapshot.apa", &stdout(&out));

    let out = apa(&["dot", framework.to_str().unwrap(), "--max-depth", "12"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).starts_with("digraph"));
}

#[test]
fn semantics_lists_admissible_and_complete_sets() {
    let dir = TempDir::new().unwrap();
    let fw = write_file(&dir, "attack.apa", SINGLE_ATTACK);
    let out = apa(&["semantics", fw.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("admissible (2):"), "got: {text}");
    assert!(text.contains("  {}"), "got: {text}");
    assert!(text.contains("  {a}"), "got: {text}");
    assert!(text.contains("complete (1):"), "got: {text}");
}

#[test]
fn semantics_over_the_size_bound_exits_with_code_3() {
    let dir = TempDir::new().unwrap();
    let fw = write_file(&dir, "attack.apa", SINGLE_ATTACK);
    let out = apa(&["semantics", fw.to_str().unwrap(), "--bound", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stderr(&out).contains("over the bound"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn audit_keyvalue_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "transfer.mm", TRANSFER);
    let args = [
        "audit",
        prog.to_str().unwrap(),
        "--n2",
        "2",
        "--depth",
        "12",
        "--format",
        "keyvalue",
    ];
    let first = apa(&args);
    let second = apa(&args);
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&second), "audit output must be stable");
    let text = stdout(&first);
    assert!(text.contains("configs_matched="), "got: {text}");
    assert!(text.contains("class.mid="), "got: {text}");
}

#[test]
fn dot_export_renders_the_chain_of_a_tiny_framework() {
    let dir = TempDir::new().unwrap();
    let fw = write_file(
        &dir,
        "chain.apa",
        "arg a\narg b\nconvert a : a -> b\ninit a\n",
    );
    let out = apa(&["dot", fw.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("digraph"), "got: {text}");
    assert!(text.contains("{a}"), "got: {text}");
    assert!(text.contains("{b}"), "got: {text}");
}

#[test]
fn closing_the_output_pipe_early_is_not_an_error() {
    use std::io::Read;
    use std::process::Stdio;

    let dir = TempDir::new().unwrap();
    let prog = write_file(&dir, "transfer.mm", TRANSFER);
    // A bound this large makes the snapshot far exceed the pipe buffer, so
    // the writer is guaranteed to hit the closed read end.
    let mut child = Command::new(env!("CARGO_BIN_EXE_apa"))
        .args(["encode", prog.to_str().unwrap(), "--bound", "20000"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut head = [0u8; 64];
    child.stdout.take().unwrap().read_exact(&mut head).unwrap();
    // Dropping the handle above closed our end of the pipe.
    let status = child.wait().unwrap();
    let mut errors = String::new();
    child
        .stderr
        .take()
        .unwrap()
        .read_to_string(&mut errors)
        .unwrap();
    assert!(status.success(), "stderr: {errors}");
    assert!(errors.is_empty(), "stderr: {errors}");
}

#[test]
fn help_is_not_a_failure_but_missing_arguments_are() {
    let out = apa(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("Usage"));

    let out = apa(&[]);
    assert_eq!(out.status.code(), Some(1));
}
