use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus").join(name)
}

fn portus(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_portus"));
    c.args(args).env_remove("PORTUS_SOLVER").env_remove("PORTUS_TIMEOUT");
    c
}

fn run(c: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = c.output().expect("binary runs");
    (status.code().expect("exited"), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn model(dir: &tempfile::TempDir, name: &str, src: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, src).unwrap();
    p.to_string_lossy().into_owned()
}

fn strip_timings(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove("millis");
            m.values_mut().for_each(strip_timings);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&mut portus(&["--help"])).0, 0);
    assert_eq!(run(&mut portus(&["translate", "--help"])).0, 0);
    assert_eq!(run(&mut portus(&["--version"])).0, 0);
    assert_eq!(run(&mut portus(&["translate"])).0, 64);
    assert_eq!(run(&mut portus(&["frobnicate"])).0, 64);
    let ring = corpus("ring.als");
    assert_eq!(run(&mut portus(&["translate", ring.to_str().unwrap(), "--policy", "sideways"])).0, 64);
    assert_eq!(run(&mut portus(&["translate", ring.to_str().unwrap(), "--scalar-opt", "maybe"])).0, 64);
}

#[test]
fn translate_prints_or_writes_smtlib() {
    let ring = corpus("ring.als");
    let (code, out, _) = run(&mut portus(&["translate", ring.to_str().unwrap()]));
    assert_eq!(code, 0);
    assert!(out.starts_with("(set-logic "), "{out}");
    assert!(out.contains("(check-sat)"));

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.smt2");
    let (code, out, _) = run(&mut portus(&["translate", ring.to_str().unwrap(), "-o", target.to_str().unwrap()]));
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.starts_with("(set-logic "));
}

#[test]
fn translate_flags_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = model(&dir, "m.als", "one sig R {}\nsig A { f: one A }\nsig B {}\nrun { some A.f } for 3 but 2 B");
    let f = f.as_str();
    let base = run(&mut portus(&["translate", f])).1;
    for flags in [&["--policy", "partition"][..], &["--scalar-opt", "off"], &["--scope-axioms", "cardinality"]] {
        let mut args = vec!["translate", f];
        args.extend_from_slice(flags);
        let (code, out, err) = run(&mut portus(&args));
        assert_eq!(code, 0, "{flags:?}: {err}");
        assert_ne!(out, base, "{flags:?}");
    }
}

#[test]
fn dump_sorts_is_json() {
    let f = corpus("partition_merge.als");
    let (code, out, _) = run(&mut portus(&["translate", f.to_str().unwrap(), "--dump-sorts", "--policy", "partition"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["policy"], "partition");
    assert!(v["sorts"].as_array().unwrap().iter().any(|s| s["name"] == "Int"));
    assert!(v["sigToSort"].is_object());
}

#[test]
fn dump_casts_theory_and_ground() {
    let f = corpus("scalar_chain.als");
    let f = f.to_str().unwrap();
    let (code, out, _) = run(&mut portus(&["translate", f, "--dump-casts"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_array());

    let (code, theory, _) = run(&mut portus(&["translate", f, "--dump-theory"]));
    assert_eq!(code, 0);
    assert!(!theory.is_empty() && !theory.contains("(set-logic"));
    let (code, ground, _) = run(&mut portus(&["translate", f, "--dump-ground"]));
    assert_eq!(code, 0);
    assert!(!ground.contains("forall") && !ground.contains("exists"), "{ground}");
}

#[test]
fn ground_budget_is_enforced() {
    let f = corpus("file_system.als");
    let (code, _, err) = run(&mut portus(&["translate", f.to_str().unwrap(), "--ground-budget", "5"]));
    assert_eq!(code, 7, "{err}");
}

#[test]
fn translate_error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("sig A {}\npred p[s: set A] { some s }\nrun p", 2),
        ("sig A { f: univ }\nrun {}", 3),
        ("sig A { f: B + Int }\nsig B {}\nrun {}", 3),
        ("sig A {", 4),
        ("sig A { f: Nope }\nrun {}", 4),
    ];
    for (i, (src, want)) in cases.iter().enumerate() {
        let p = model(&dir, &format!("m{i}.als"), src);
        let (code, out, err) = run(&mut portus(&["translate", &p]));
        assert_eq!(code, *want, "{src}: {err}");
        assert!(out.is_empty());
        assert!(err.starts_with("error: "), "{err}");
    }
    let (code, _, _) = run(&mut portus(&["translate", "/nonexistent/x.als"]));
    assert_eq!(code, 10);
}

#[test]
fn command_selection() {
    let dir = tempfile::tempdir().unwrap();
    let f = model(&dir, "m.als", "sig A {}\nrun { some A } for 2\nempty: run { no A } for 2\nnever: run { some A and no A } for 2");
    let f = f.as_str();
    assert_eq!(run(&mut portus(&["solve", f])).0, 0);
    assert_eq!(run(&mut portus(&["solve", f, "--cmd", "2"])).0, 1);
    assert_eq!(run(&mut portus(&["solve", f, "--cmd", "never"])).0, 1);
    assert_eq!(run(&mut portus(&["solve", f, "--cmd", "empty"])).0, 0);
    assert_eq!(run(&mut portus(&["oracle", f, "--cmd", "never"])).0, 1);
    assert_eq!(run(&mut portus(&["translate", f, "--cmd", "99"])).0, 4);
    assert_eq!(run(&mut portus(&["translate", f, "--cmd", "noSuchCommand"])).0, 4);
}

#[test]
fn solve_exit_codes_and_instance_json() {
    let dir = tempfile::tempdir().unwrap();
    let sat = model(&dir, "sat.als", "sig A { f: set A }\nrun { some f } for 2");
    let unsat = model(&dir, "unsat.als", "sig A {}\nrun { some A and no A } for 2");

    let (code, out, _) = run(&mut portus(&["solve", &sat]));
    assert_eq!(code, 0);
    assert!(out.starts_with("SAT\n"));
    let (code, out, _) = run(&mut portus(&["solve", &unsat]));
    assert_eq!(code, 1);
    assert_eq!(out, "UNSAT\n");

    let json = dir.path().join("inst.json");
    let (code, _, _) = run(&mut portus(&["solve", &sat, "--instance-json", json.to_str().unwrap()]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(!v["fieldTuples"]["f"].as_array().unwrap().is_empty());
    assert!(v["sigAtoms"]["A"].is_array());
    assert!(v["bitwidth"].is_number());

    let (code, out, _) = run(&mut portus(&["solve", &sat, "--instance-json"]));
    assert_eq!(code, 0);
    let body = out.strip_prefix("SAT\n").unwrap();
    serde_json::from_str::<serde_json::Value>(body).unwrap();
}

#[test]
fn solver_and_timeout_precedence() {
    let f = corpus("file_system.als");
    let f = f.to_str().unwrap();

    let (code, out, _) = run(portus(&["solve", f]).env("PORTUS_TIMEOUT", "0.001"));
    assert_eq!(code, 5);
    assert!(out.starts_with("TIMEOUT after ") && out.trim_end().ends_with('s'), "{out}");

    let (code, _, _) = run(portus(&["solve", f, "--timeout-sec", "60"]).env("PORTUS_TIMEOUT", "0.001"));
    assert_eq!(code, 0);

    let (code, _, err) = run(portus(&["solve", f]).env("PORTUS_SOLVER", "/nonexistent/solver"));
    assert_eq!(code, 6, "{err}");
    let (code, _, _) = run(portus(&["solve", f, "--solver", "z3"]).env("PORTUS_SOLVER", "/nonexistent/solver"));
    assert_eq!(code, 0);

    assert_eq!(run(&mut portus(&["solve", f, "--timeout-sec", "0"])).0, 1);
    assert_eq!(run(portus(&["solve", f]).env("PORTUS_TIMEOUT", "soon")).0, 64);
}

#[test]
fn oracle_prints_verdict_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let sat = model(&dir, "sat.als", "sig A { f: one A }\nrun { some a: A | a.f != a } for 2");
    let unsat = model(&dir, "unsat.als", "sig A { f: one A }\nrun { some A and no f } for 2");

    let (code, out, _) = run(&mut portus(&["oracle", &sat]));
    assert_eq!(code, 0);
    let (head, body) = out.split_once('\n').unwrap();
    assert_eq!(head, "sat");
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(v["sigAtoms"]["A"].as_array().unwrap().len(), 2);
    assert_eq!(v["fieldTuples"]["f"].as_array().unwrap().len(), 2);

    let (code, out, _) = run(&mut portus(&["oracle", &unsat]));
    assert_eq!(code, 1);
    assert_eq!(out, "unsat\n");
}

#[test]
fn log_json_lines_parse() {
    let f = corpus("ring.als");
    let (code, _, err) = run(&mut portus(&["--log-json", "-v", "solve", f.to_str().unwrap()]));
    assert_eq!(code, 0);
    let lines: Vec<&str> = err.lines().collect();
    assert!(lines.len() >= 2, "{err}");
    for l in lines {
        let v: serde_json::Value = serde_json::from_str(l).unwrap_or_else(|e| panic!("{l}: {e}"));
        assert!(v["level"].is_string() && v["message"].is_string());
    }
}

#[test]
fn seeded_difftest_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        let path = dir.path().join(format!("r{i}.json"));
        let (code, out, err) = run(&mut portus(&[
            "difftest", "--seed", "42", "--count", "20", "--jobs", jobs, "--report", path.to_str().unwrap(),
        ]));
        assert_eq!(code, 0, "{out}{err}");
        assert!(out.contains("20 models"), "{out}");
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        strip_timings(&mut v);
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
    let cases = reports[0]["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 20);
    assert!(cases.iter().all(|c| c["outcomes"].as_array().unwrap().len() == 8));
}

#[test]
fn injected_bugs_are_detected() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["hier_one_child.als", "set_ops.als", "file_system.als"] {
        std::fs::copy(corpus(f), dir.path().join(f)).unwrap();
    }
    let d = dir.path().to_str().unwrap();
    let html = dir.path().join("report.html");
    let (code, out, _) = run(&mut portus(&["difftest", "--corpus", d, "--report", html.to_str().unwrap()]));
    assert_eq!(code, 0, "{out}");
    let page = std::fs::read_to_string(&html).unwrap();
    assert!(page.starts_with("<!doctype html>") && page.contains("<table"));

    for bug in ["no-disjointness", "diff-ignores-right"] {
        let (code, out, _) = run(&mut portus(&["difftest", "--corpus", d, "--inject-bug", bug]));
        assert_ne!(code, 0, "{bug} went unnoticed:\n{out}");
        assert!(out.contains("FAIL "), "{out}");
    }
    let (code, out, _) = run(&mut portus(&["difftest", "--inject-bug", "no-disjointness"]));
    assert_ne!(code, 0, "{out}");
}

#[test]
fn hidden_flag_is_not_advertised() {
    let (_, out, _) = run(&mut portus(&["difftest", "--help"]));
    assert!(!out.contains("inject"));
    assert!(out.contains("--seed") && out.contains("--report"));
}
