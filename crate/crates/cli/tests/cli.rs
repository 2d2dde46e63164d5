use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn monalg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monalg")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn equiv_closed_collapses_dominated_branch() {
    let out = monalg(&["equiv", "--alphabet", "a,b", "--mode", "verdict", "yes", "yes + a.a.a.yes"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "equivalent");
}

#[test]
fn equiv_open_depends_on_alphabet() {
    assert_eq!(code(&monalg(&["equiv", "--alphabet", "a", "x", "x + a.x"])), 0);
    let out = monalg(&["equiv", "--alphabet", "a,b", "x", "x + a.x"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("substitution: x -> "));
}

#[test]
fn equiv_oracle_agrees_with_forms() {
    for alphabet in ["a", "a,b"] {
        let by_form = code(&monalg(&["equiv", "--alphabet", alphabet, "x + a.yes", "x + a.(yes + x)"]));
        let by_oracle = code(&monalg(&["equiv", "--oracle", "--alphabet", alphabet, "x + a.yes", "x + a.(yes + x)"]));
        assert_eq!(by_form, by_oracle, "alphabet {alphabet}");
    }
}

#[test]
fn omega_mode_identifies_full_fan() {
    assert_eq!(code(&monalg(&["equiv", "--alphabet", "a,b", "--mode", "omega", "yes", "a.yes + b.yes"])), 0);
    assert_eq!(code(&monalg(&["equiv", "--alphabet", "a,b", "yes", "a.yes + b.yes"])), 1);
}

#[test]
fn witness_is_sound_and_silent_under_end() {
    let out = monalg(&["witness", "--n", "2", "--alphabet", "a,b", "--fuzz", "100"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("neither accepted nor rejected"));
}

#[test]
fn file_inputs_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let lhs = dir.path().join("lhs.mon");
    let rhs = dir.path().join("rhs.mon");
    fs::write(&lhs, "# left side\nalphabet: a,b\nvars: x\nx + a.(yes + b.yes)\n").unwrap();
    fs::write(&rhs, "x + a.yes\n").unwrap();
    let at = |p: &Path| format!("@{}", p.display());
    assert_eq!(code(&monalg(&["equiv", &at(&lhs), &at(&rhs)])), 0);
    assert_eq!(code(&monalg(&["equiv", "@/nonexistent/file", "yes"])), 2);
}

#[test]
fn emitted_proofs_check_and_mutations_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("nf.proof");
    let proof_s = proof.to_str().unwrap();
    let out = monalg(&["normalize", "--form", "open-rnf", "x + yes + a.b.(no + b.a.x)", "--emit-proof", proof_s]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "yes + a.b.no + x");
    assert_eq!(code(&monalg(&["check-proof", proof_s])), 0);
    let claim = "x + yes + a.b.(no + b.a.x) = yes + a.b.no + x";
    assert_eq!(code(&monalg(&["check-proof", proof_s, "--claim", claim])), 0);
    assert_eq!(code(&monalg(&["check-proof", proof_s, "--claim", "x = yes"])), 1);

    let text = fs::read_to_string(&proof).unwrap();
    let bad = dir.path().join("bad.proof");
    fs::write(&bad, text.replacen("by axiom(A1", "by axiom(A3", 1)).unwrap();
    assert_eq!(code(&monalg(&["check-proof", bad.to_str().unwrap()])), 1);
}

#[test]
fn prove_two_sides() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("eq.proof");
    let proof_s = proof.to_str().unwrap();
    let out = monalg(&["prove", "--form", "rnf", "--out", proof_s, "no + a.(yes + b.yes)", "no + a.yes"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&monalg(&["check-proof", proof_s, "--claim", "no + a.(yes + b.yes) = no + a.yes"])), 0);
    assert_eq!(code(&monalg(&["prove", "--form", "rnf", "yes", "no"])), 1);
}

#[test]
fn json_envelope_parses() {
    let out = monalg(&["--json", "equiv", "--alphabet", "a,b", "x", "x + a.x"]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["command"], "equiv");
    assert_eq!(v["result"]["equivalent"], false);
    assert!(v["counterexample"]["trace"].is_string());
    assert!(v["timing"]["elapsed_ms"].is_number());

    let out = monalg(&["--json", "normalize", "--form", "rnf", "yes + a.a.a.yes"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["term"], "yes");
}

#[test]
fn fuzz_is_deterministic_and_clean() {
    let args = ["fuzz", "--alphabet", "a,b", "--pairs", "40", "--depth", "3", "--seed", "7"];
    let first = monalg(&args);
    let second = monalg(&args);
    assert_eq!(code(&first), 0, "{}", stdout(&first));
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("disagreements: 0"));
}

#[test]
fn axioms_listing_and_fuzz() {
    let out =
        monalg(&["axioms", "--system", "Ev", "--alphabet", "a,b", "--max-s", "1", "--max-k", "1", "--fuzz", "20"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().skip(1).all(|l| l.ends_with("PASS")), "{text}");

    let out = monalg(&["axioms", "--system", "Ev1'", "--alphabet", "a,b", "--fuzz", "50"]);
    assert_eq!(code(&out), 1);
    let v1 = stdout(&out).lines().find(|l| l.contains("# V1")).unwrap().to_string();
    assert!(v1.contains("FAIL"), "{v1}");
    assert_eq!(code(&monalg(&["axioms", "--system", "Ev1'", "--alphabet", "a", "--fuzz", "50"])), 0);
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(code(&monalg(&["parse", "a.("])), 2);
    assert_eq!(code(&monalg(&["normalize", "--form", "nonsense", "yes"])), 2);
    assert_eq!(code(&monalg(&["lang", "x + a.yes"])), 2);
    assert_eq!(code(&monalg(&["frobnicate"])), 2);
}

#[test]
fn lang_lists_minimal_traces() {
    let out = monalg(&["--json", "lang", "no + a.(yes + b.yes)"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["accept"], serde_json::json!(["a"]));
    assert_eq!(v["result"]["reject"], serde_json::json!(["<eps>"]));
}
