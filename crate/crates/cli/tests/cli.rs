use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn sedan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sedan"))
        .args(args)
        .env_remove("SEDAN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_codes_follow_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.lisp");
    std::fs::write(&empty, "").unwrap();
    let bad = dir.path().join("bad.lisp");
    std::fs::write(&bad, "(defun f (x) (g x))\n(test? (equal x x))\n").unwrap();

    let o = sedan(&[empty.to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Processed 0 forms"));

    let o = sedan(&[corpus("rev.lisp").to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("We falsified the conjecture. Here are counterexamples:"));

    let o = sedan(&[bad.to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("undefined function g"));

    let o = sedan(&[dir.path().join("missing.lisp").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_corpus_file_meets_the_exit_code_contract() {
    for (name, code) in [
        ("base-rules.lisp", 0),
        ("triangle-rules.lisp", 0),
        ("triangle.lisp", 1),
        ("rev.lisp", 1),
        ("inequality.lisp", 1),
        ("gen-backtrack.lisp", 0),
    ] {
        let path = corpus(name);
        let o = sedan(&[path.to_str().unwrap(), "--format", "structured"]);
        let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let statuses: Vec<&str> = doc["forms"].as_array().unwrap().iter().map(|f| f["status"].as_str().unwrap()).collect();
        let expected = if statuses.contains(&"error") {
            2
        } else if statuses.contains(&"falsified") {
            1
        } else {
            0
        };
        assert_eq!(o.status.code(), Some(expected), "{name}: {statuses:?}");
        assert_eq!(expected, code, "{name}");
        assert_eq!(doc["exit_code"], code);
    }
}

#[test]
fn structured_report_is_byte_identical_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let rev = corpus("rev.lisp");
    let report = |file: &str, seed: &str| {
        let path = dir.path().join(file);
        let o = sedan(&[rev.to_str().unwrap(), "--seed", seed, "--format", "structured", "--report", path.to_str().unwrap()]);
        assert!(o.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let a = report("a.json", "5");
    let b = report("b.json", "5");
    let c = report("c.json", "6");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["seed"], 5);
}

#[test]
fn seed_flag_beats_environment() {
    let rev = corpus("rev.lisp");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sedan"));
        cmd.arg(&rev).args(["--format", "structured"]).env_remove("SEDAN_SEED");
        if let Some(e) = env {
            cmd.env("SEDAN_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        let doc: serde_json::Value = serde_json::from_slice(&cmd.output().unwrap().stdout).unwrap();
        doc["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 24);
    assert_eq!(run(Some("9"), None), 9);
    assert_eq!(run(Some("9"), Some("11")), 11);
}

#[test]
fn counterexample_strings_parse_back_and_refalsify() {
    use sedan_core::eval::{evaluate, Binding};
    use sedan_core::session::{FsLoader, Session, SessionOptions};
    use sedan_core::term::parse_term;

    let rev = corpus("rev.lisp");
    let o = sedan(&[rev.to_str().unwrap(), "--format", "structured"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut s = Session::new(SessionOptions::default(), &FsLoader);
    s.run_source("rev", "(defun rev (x) (if (endp x) nil (append (rev (cdr x)) (list (car x)))))").unwrap();
    let mut seen = 0;
    for f in doc["forms"].as_array().unwrap() {
        let Some(cxs) = f["test"]["counterexamples"].as_array() else { continue };
        let formula = parse_term(f["formula"].as_str().unwrap()).unwrap();
        for cx in cxs {
            let b = Binding::parse(cx.as_str().unwrap()).unwrap();
            assert!(evaluate(&formula, &b, &s.world).unwrap().is_nil(), "{cx}");
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn backtrack_switch_changes_the_proof() {
    let path = corpus("gen-backtrack.lisp");
    let on = stdout(&sedan(&[path.to_str().unwrap(), "--format", "text"]));
    let off = stdout(&sedan(&[path.to_str().unwrap(), "--format", "text", "--backtrack", "off"]));
    assert!(on.contains("discarded after testing refuted its result"), "{on}");
    assert!(off.contains("cannot lift"), "{off}");
}

#[test]
fn several_files_give_an_array() {
    let o = sedan(&[corpus("base-rules.lisp").to_str().unwrap(), corpus("rev.lisp").to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("==> ") && text.contains("rev.lisp <=="));
    let start = text.find("\n[\n").unwrap() + 1;
    let docs: serde_json::Value = serde_json::from_str(&text[start..]).unwrap();
    assert_eq!(docs.as_array().unwrap().len(), 2);
    assert_eq!(o.status.code(), Some(1));
}
