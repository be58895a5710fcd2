//! End-to-end tests of the `fibra` binary against the fixture corpus.

use std::path::Path;
use std::process::Command;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn fibra(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fibra"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_on_universe(args: &[&str]) -> (i32, serde_json::Value) {
    let u = fixture("universe.json");
    let mut full = vec!["--universe", u.as_str()];
    full.extend_from_slice(args);
    let (code, stdout, stderr) = fibra(&full);
    assert!(
        stderr.is_empty(),
        "unexpected stderr for {args:?}: {stderr}"
    );
    let value: serde_json::Value =
        serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("bad report for {args:?}: {e}\n{stdout}"));
    (code, value)
}

#[test]
fn classify_diagonal_reports_equivalence_and_ordering() {
    let (code, report) = run_on_universe(&["classify", "diag"]);
    assert_eq!(code, 0);
    assert_eq!(report["status"], "ok");
    assert_eq!(
        report["outcome"]["flags"],
        serde_json::json!(["equivalence", "ordering"])
    );
}

#[test]
fn check_reports_counterexamples() {
    let (code, report) = run_on_universe(&["check", "par", "--property", "transitive"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["holds"], true);

    let (code, report) = run_on_universe(&["check", "notrans", "--property", "transitive"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["holds"], false);
    assert_eq!(
        report["outcome"]["counterexample"]["witness"],
        serde_json::json!(["0", "1", "2"])
    );

    let (code, report) = run_on_universe(&["check", "rho", "--property", "free"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["holds"], false);

    let (code, report) = run_on_universe(&["check", "F", "--property", "injective-base"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["holds"], true);
}

#[test]
fn compose_applies_the_second_operand_first() {
    let (code, report) = run_on_universe(&["compose", "G", "F"]);
    assert_eq!(code, 0);
    assert_eq!(
        report["outcome"]["base_pairs"],
        serde_json::json!([["m0", "k0"]])
    );
    assert_eq!(
        report["outcome"]["fibers"]["m0|k0"],
        serde_json::json!([["a", "z"]])
    );

    // plain correspondences compose too
    let (code, report) = run_on_universe(&["compose", "phi", "phi"]);
    assert_eq!(code, 0);
    // phi's target and source are different label sets, so the middle is empty
    assert_eq!(report["outcome"]["pairs"], serde_json::json!([]));
}

#[test]
fn inverse_works_across_kinds() {
    let (code, report) = run_on_universe(&["inverse", "phi"]);
    assert_eq!(code, 0);
    assert_eq!(
        report["outcome"]["pairs"],
        serde_json::json!([["u", "x"], ["v", "y"]])
    );

    let (code, report) = run_on_universe(&["inverse", "diag"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["kind"], "reduced");
}

#[test]
fn image_of_set_and_of_subbundle() {
    let (code, report) = run_on_universe(&["image", "psi", "two"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["image"], serde_json::json!(["u"]));

    let (code, report) = run_on_universe(&["image", "TF", "TA"]);
    assert_eq!(code, 0);
    assert_eq!(
        report["outcome"]["fibers"],
        serde_json::json!({"r0": ["b0"], "r1": ["b0"]})
    );
}

#[test]
fn quotient_reports_classes_and_nat() {
    let (code, report) = run_on_universe(&["quotient", "P", "par"]);
    assert_eq!(code, 0);
    assert_eq!(
        report["outcome"]["classes"]["m"],
        serde_json::json!({"0": ["0", "2"], "1": ["1", "3"]})
    );
    assert_eq!(report["outcome"]["nat"]["m"]["2"], "0");

    let (code, report) = run_on_universe(&["quotient", "P", "notrans"]);
    assert_eq!(code, 2);
    assert_eq!(report["status"], "error");
    assert_eq!(report["error"]["code"], "NotAnEquivalence");
}

#[test]
fn factorize_produces_the_three_morphisms() {
    let (code, report) = run_on_universe(&["factorize", "f"]);
    assert_eq!(code, 0);
    assert_eq!(
        report["outcome"]["image"]["fibers"]["m"],
        serde_json::json!(["u", "v"])
    );
    assert_eq!(report["outcome"]["iso"]["map"]["m"]["0"], "u");
    assert_eq!(report["outcome"]["nat"]["map"]["m"]["1"], "0");
    assert_eq!(report["outcome"]["incl"]["map"]["m"]["v"], "v");
}

#[test]
fn orbits_flags_the_fixed_point_as_degenerate() {
    let (code, report) = run_on_universe(&["orbits", "rho"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["free"], false);
    assert_eq!(
        report["outcome"]["degenerate"],
        serde_json::json!([{"point": "m", "class": "r", "size": 1, "expected": 2}])
    );
    assert_eq!(report["outcome"]["tower"]["height"], 2);
}

#[test]
fn continuity_with_and_without_a_set() {
    let (code, report) = run_on_universe(&["continuity", "phi", "S", "D", "--on", "cx"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["continuous"], true);

    let (code, report) = run_on_universe(&["continuity", "phi", "S", "D", "--on", "cy"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["continuous"], false);

    let (code, report) = run_on_universe(&["continuity", "phi", "S", "D"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["continuous"], false);
}

#[test]
fn sections_of_the_diagonal_relation() {
    let (code, report) = run_on_universe(&["sections", "diag"]);
    assert_eq!(code, 0);
    // A has two sections; the diagonal relates each to itself
    assert_eq!(
        report["outcome"]["pairs"],
        serde_json::json!([
            ["m0=a;m1=a", "m0=a;m1=a"],
            ["m0=b;m1=a", "m0=b;m1=a"]
        ])
    );
}

#[test]
fn tower_report() {
    let (code, report) = run_on_universe(&["tower", "TW"]);
    assert_eq!(code, 0);
    assert_eq!(report["outcome"]["height"], 2);
    assert_eq!(
        report["outcome"]["projection_to_base"]["m|a|z0"],
        serde_json::json!("m")
    );
}

#[test]
fn exit_codes_separate_usage_and_domain_errors() {
    // usage errors: unknown subcommand, missing universe
    let (code, _, stderr) = fibra(&["definitely-not-a-command"]);
    assert_eq!(code, 1);
    assert!(!stderr.is_empty());

    let (code, _, stderr) = fibra(&["classify", "diag"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("--universe"));

    // domain errors: invalid document, unknown object
    let bad = fixture("bad.json");
    let (code, stdout, _) = fibra(&["--universe", &bad, "classify", "diag"]);
    assert_eq!(code, 2);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["error"]["code"], "InvariantViolation");
    assert!(report["error"]["message"]
        .as_str()
        .unwrap()
        .contains("/fibered/F/target"));

    let (code, report) = run_on_universe(&["classify", "no-such-object"]);
    assert_eq!(code, 2);
    assert_eq!(report["error"]["code"], "UnknownObject");

    // a valid but empty universe: unknown names are domain errors
    let empty = fixture("empty.json");
    let (code, stdout, _) = fibra(&["--universe", &empty, "tower", "TW"]);
    assert_eq!(code, 2);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["error"]["code"], "UnknownObject");
}

#[test]
fn help_exits_zero() {
    let (code, stdout, _) = fibra(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("classify"));
}

#[test]
fn enum_limit_env_is_honored() {
    let u = fixture("universe.json");
    let out = Command::new(env!("CARGO_BIN_EXE_fibra"))
        .args(["--universe", &u, "sections", "diag"])
        .env("FIBRA_MAX_ENUM", "1")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(report["error"]["code"], "EnumerationLimit");
}
