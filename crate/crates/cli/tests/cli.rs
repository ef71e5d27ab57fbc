use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use ichd_core::syntax::parse_program;

fn ichd(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ichd"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn kb_dir(files: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FIGURE_ONE: &str = r#"{"answers": [
  {"subject": "s4", "value": "headache", "topic": "symptom", "answer": true},
  {"subject": "headache", "value": 2, "topic": "attacks", "answer": true},
  {"subject": "headache", "value": 5, "topic": "attacks", "answer": true},
  {"subject": "headache", "value": 240, "topic": "duration", "answer": true},
  {"subject": "headache", "value": 4320, "topic": "durationAtMost", "answer": true},
  {"subject": "headache", "value": "loc1", "topic": "attribute", "answer": true},
  {"subject": "headache", "value": "qual1", "topic": "attribute", "answer": true},
  {"subject": "headache", "value": "int3", "topic": "attribute", "answer": true},
  {"subject": "s37", "value": "nausea or vomiting", "topic": "symptom", "answer": true}
]}"#;

#[test]
fn check_accepts_shipped_kb() {
    let o = ichd(&["check"], "");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("knowledge base 1.0.0: ok"));
}

#[test]
fn check_rejects_unstratified_kb() {
    let dir = kb_dir(&[("rules.kb", "a :- not a.\n")]);
    let o = ichd(&["check", "--kb-dir", path(dir.path())], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle through negation"));
}

#[test]
fn check_rejects_dangling_isa() {
    let dir = kb_dir(&[("schema.kb", "ichdDiagnosis(d.x, \"x\").\nisA(d.x, d.y).\n")]);
    let o = ichd(&["check", "--kb-dir", path(dir.path())], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown identifier d.y"));
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(ichd(&["simulate", "--runs", "0"], "").status.code(), Some(2));
    assert_eq!(ichd(&["frobnicate"], "").status.code(), Some(2));
}

#[test]
fn gen_neg_prints_denials_of_duration_rule() {
    let o = ichd(&["gen-neg"], "");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let head = "-criterion(Id, \"B\") :- ichdDiagnosis(Id, \"migraine without aura\"), ichdSymptom(IdSym, \"headache\")";
    for tail in [
        ", symptom(IdSym), -minDuration(IdSym, 240).",
        ", symptom(IdSym), -maxDuration(IdSym, 4320).",
        ", -symptom(IdSym).",
    ] {
        assert!(text.contains(&format!("{head}{tail}")), "missing {tail}");
    }
    let reparsed = parse_program(&text).unwrap();
    assert_eq!(reparsed.rules.len(), text.lines().filter(|l| l.starts_with('-')).count());
}

#[test]
fn gen_neg_warns_on_rule_without_history() {
    let dir = kb_dir(&[(
        "rules.kb",
        "ichdDiagnosis(d.x, \"x\").\ndiagnosis(d.x).\ncriterion(d.x, \"A\") :- ichdDiagnosis(d.x, \"x\").\n",
    )]);
    let o = ichd(&["gen-neg", "--kb-dir", path(dir.path())], "");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("% warning:"), "{text}");
    assert!(text.contains("no history literal"));
    assert!(parse_program(&text).unwrap().is_empty());
}

#[test]
fn simulate_is_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = ichd(&["simulate", "--runs", "40", "--seed", "9", "--out", path(out)], "");
        assert_eq!(o.status.code(), Some(0));
    }
    let csv = fs::read(&a).unwrap();
    assert_eq!(csv, fs::read(&b).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("run,seed,total_length,first_compatible_length,outcome,compatible_count\n"));
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn immediate_eof_aborts_undetermined() {
    let o = ichd(&["ask"], "");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("outcome: aborted, all undetermined after 0 answers"));
}

#[test]
fn figure_one_profile_completes_with_migraine_without_aura() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("fig1.json");
    fs::write(&replay, FIGURE_ONE).unwrap();
    let o = ichd(&["ask", "--replay", path(&replay)], &"n\n".repeat(80));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("outcome: completed"), "{text}");
    let compatible = text.split("compatible:\n").nth(1).unwrap().split("not compatible:").next().unwrap();
    assert!(compatible.contains("d.1.1 migraine without aura"), "{text}");
    assert!(compatible.contains("d.1 migraine"));
}

#[test]
fn saved_session_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let saved = dir.path().join("session.json");
    let answers = "y\nn\ny\ny\nn\ny\nn\nn\ny\nn\ny\ny\nn\nn\ny\nn\ny\nn\nn\nn\ny\ny\nn\nn\ny\nn\nn\nn\ny\nn\n";
    let first = ichd(&["ask", "--save", path(&saved)], answers);
    assert_eq!(first.status.code(), Some(0));
    let again = ichd(&["ask", "--replay", path(&saved)], "");
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&again));
}

#[test]
fn inconsistent_replay_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("bad.json");
    fs::write(
        &replay,
        r#"{"answers": [
          {"subject": "s4", "value": "headache", "topic": "symptom", "answer": true},
          {"subject": "headache", "value": "loc1", "topic": "attribute", "answer": true},
          {"subject": "headache", "value": "loc2", "topic": "attribute", "answer": true}
        ]}"#,
    )
    .unwrap();
    let o = ichd(&["ask", "--replay", path(&replay)], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconsistent"));
}
