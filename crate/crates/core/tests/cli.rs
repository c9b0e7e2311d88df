use std::path::{Path, PathBuf};
use std::process::Command;

use bhf::arc_algebra::{Algebra, ArcDiagram};
use bhf::bimodules::{dd_half_identity, TableAa};
use bhf::diagram::DiagramSpec;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_bhf"))
        .args(args)
        .output()
        .unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn statuses(report: &Value) -> Vec<String> {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["status"].as_str().unwrap().to_string())
        .collect()
}

fn zt() -> ArcDiagram {
    ArcDiagram::from_json(&std::fs::read_to_string(data("zt.json")).unwrap()).unwrap()
}

#[test]
fn validate_reports_pass_fail_and_input_errors() {
    let (code, report) = run(&["validate", p(&data("zt_identity.json"))]);
    assert_eq!(code, 0);
    assert_eq!(statuses(&report), ["pass"]);

    let dir = tempfile::tempdir().unwrap();
    let mut spec: DiagramSpec =
        serde_json::from_str(&std::fs::read_to_string(data("zt_identity.json")).unwrap()).unwrap();
    spec.faces[0].sides.swap(1, 2);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, serde_json::to_string(&spec).unwrap()).unwrap();
    let (code, report) = run(&["validate", p(&broken)]);
    assert_eq!(code, 1);
    assert!(!report["witnesses"].as_array().unwrap().is_empty());

    let (code, report) = run(&["validate", p(&dir.path().join("missing.json"))]);
    assert_eq!(code, 2);
    assert!(report["error"].as_str().unwrap().contains("missing.json"));
}

#[test]
fn module_dumps_have_the_expected_generators() {
    let (code, report) = run(&["module", p(&data("zt_identity.json"))]);
    assert_eq!(code, 0);
    assert_eq!(
        report["output"]["module"]["generators"]
            .as_array()
            .unwrap()
            .len(),
        2
    );
    let (code, report) = run(&["module", p(&data("zt_twist.json")), "--max-chords", "6"]);
    assert_eq!(code, 0);
    assert_eq!(
        report["output"]["module"]["generators"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    let (code, report) = run(&["module", p(&data("zt_twist.json")), "--max-chords", "0"]);
    assert_eq!(code, 0);
    assert_eq!(
        report["output"]["module"]["table"]
            .as_array()
            .unwrap()
            .len(),
        0
    );
}

#[test]
fn identity_check_accepts_relabelled_pairs_and_rejects_a_zero_dd() {
    let (code, _) = run(&["identity-check", p(&data("zt.json"))]);
    assert_eq!(code, 0);

    let dir = tempfile::tempdir().unwrap();
    let permuted = dir.path().join("permuted.json");
    std::fs::write(
        &permuted,
        r#"{"genus":1,"circles":[{"id":"c","points":["p1","p2","p3","p4"]}],
            "matched_pairs":[{"arc":"B","points":["p2","p4"]},{"arc":"A","points":["p1","p3"]}]}"#,
    )
    .unwrap();
    let (code, report) = run(&["identity-check", p(&permuted)]);
    assert_eq!(code, 0, "{report}");

    let mut dd = dd_half_identity(&zt()).unwrap();
    for w in 0..dd.generators().len() {
        dd.clear(w);
    }
    let zero = dir.path().join("zero_dd.json");
    std::fs::write(&zero, dd.to_json()).unwrap();
    let (code, report) = run(&["identity-check", p(&data("zt.json")), "--dd", p(&zero)]);
    assert_eq!(code, 1);
    assert!(statuses(&report).contains(&"fail".to_string()));
}

#[test]
fn compose_check_cases() {
    for (a, b, c) in [
        ("zt_twist.json", "zt_twist.json", "zt_twist_sq.json"),
        ("zt_twist.json", "zt_twist_inv.json", "zt_identity.json"),
        ("zt_twist.json", "zt_identity.json", "zt_twist.json"),
    ] {
        let (code, report) = run(&["compose-check", p(&data(a)), p(&data(b)), p(&data(c))]);
        assert_eq!(code, 0, "{a} {b} {c}: {report}");
    }
    let (code, _) = run(&[
        "compose-check",
        p(&data("zt_twist.json")),
        p(&data("zt_twist.json")),
        p(&data("zt_identity.json")),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn faithful_check_cases() {
    assert_eq!(run(&["faithful-check", p(&data("zt_identity.json"))]).0, 0);
    assert_eq!(run(&["faithful-check", p(&data("zt_twist.json"))]).0, 1);
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    let alg = |c| Algebra::new(zt(), c);
    std::fs::write(
        &empty,
        TableAa::new(alg('J'), alg('I'), Vec::new(), 6).to_json(),
    )
    .unwrap();
    assert_eq!(run(&["faithful-check", p(&empty)]).0, 1);
}

#[test]
fn reports_are_stable_across_runs_and_thread_counts() {
    let path = data("zt_finger_b.json");
    let args = ["reduce", p(&path)];
    let (_, a) = run(&args);
    let (_, b) = run(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(a["digest"], run(&args).1["digest"]);
    let strip = |mut v: Value| {
        let obj = v.as_object_mut().unwrap();
        obj.remove("wall_time_ms");
        obj.remove("command");
        obj.remove("digest");
        v
    };
    assert_eq!(strip(a), strip(b));
}

#[test]
fn truncation_exits_with_three() {
    let (code, report) = run(&["module", p(&data("zt_twist_sq.json")), "--max-area", "1"]);
    assert_eq!(code, 3, "{report}");
    assert_eq!(report["truncated"], Value::Bool(true));
}

#[test]
fn pipeline_through_dump_files() {
    let dir = tempfile::tempdir().unwrap();
    let boxed = dir.path().join("box.json");
    let (code, _) = run(&[
        "box",
        p(&data("zt_twist_inv.json")),
        "--left",
        p(&data("zt_twist.json")),
        "--out",
        p(&boxed),
    ]);
    assert_eq!(code, 0);
    assert_eq!(run(&["verify", p(&boxed)]).0, 0);
    let (code, report) = run(&["reduce", p(&boxed)]);
    assert_eq!(code, 0);
    assert_eq!(report["output"]["generators"].as_array().unwrap().len(), 2);
    assert_eq!(
        run(&["compare", p(&boxed), p(&data("zt_identity.json"))]).0,
        0
    );
    assert_eq!(run(&["compare", p(&boxed), p(&data("zt_twist.json"))]).0, 1);
}

#[test]
fn small_commands() {
    let (code, report) = run(&["algebra", p(&data("zt.json"))]);
    assert_eq!(code, 0);
    assert_eq!(
        report["output"]["algebra"]["chords"]
            .as_array()
            .unwrap()
            .len(),
        6
    );
    let (code, report) = run(&["generators", p(&data("zt_twist.json"))]);
    assert_eq!(code, 0);
    assert_eq!(report["output"]["count"], 3);
    let (code, report) = run(&[
        "count",
        p(&data("zt_identity.json")),
        "--x",
        "x1",
        "--y",
        "x2",
        "--sigma",
        "q1-q2",
        "--rho",
        "p1-p2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["output"]["count_mod2"], 1);
    assert_eq!(run(&["count", p(&data("zt_twist.json"))]).0, 0);
    assert_eq!(run(&["no-such-command"]).0, 2);
}
