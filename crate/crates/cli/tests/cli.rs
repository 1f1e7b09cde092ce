use std::path::Path;
use std::process::{Command, Output};

use curvlab_core::report::ClassificationReport;
use serde_json::Value;

fn curvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab")).args(args).output().expect("spawn curvlab")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = curvlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--report", "json"]);
    serde_json::from_str(&stdout_ok(&a)).unwrap()
}

fn verdict<'a>(report: &'a Value, id: &str) -> &'a str {
    report["structures"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["id"] == id)
        .unwrap_or_else(|| panic!("no structure {id}"))["verdict"]
        .as_str()
        .unwrap()
}

fn verdicts(report: &Value) -> Vec<(String, String)> {
    report["structures"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["id"].as_str().unwrap().to_owned(), s["verdict"].as_str().unwrap().to_owned()))
        .collect()
}

fn write(dir: &Path, name: &str, body: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(body).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn charged_nariai_report() {
    let r = json(&["classify", "--metric", "charged_nariai", "--params", "r0=1,L0=0.5", "--points", "16", "--seed", "7"]);
    for key in ["metric", "params", "convention", "points", "structures", "audits"] {
        assert!(r.get(key).is_some(), "missing key {key}");
    }
    for id in ["locally_symmetric", "semisym_R_R", "roter", "two_quasi_einstein", "ein_2", "pseudosym_C_R_g", "pseudosym_P_R_S"] {
        assert_eq!(verdict(&r, id), "holds", "{id}");
    }
    let audits = r["audits"].to_string();
    assert!(audits.contains("roter"), "no Roter audit: {audits}");
}

#[test]
fn generic_cns_type_report() {
    let r = json(&["classify", "--metric", "cns_type", "--xi", "2+sin(r)", "--h", "2+sin(theta)"]);
    assert_eq!(verdict(&r, "locally_symmetric"), "fails");
    assert_eq!(verdict(&r, "semisym_R_R"), "holds");
    assert_eq!(verdict(&r, "SGK4_R"), "holds");
    assert_eq!(verdict(&r, "weakly_symmetric"), "fails");
}

#[test]
fn minkowski_report() {
    let r = json(&["classify", "--metric", "minkowski"]);
    assert_eq!(verdict(&r, "flat"), "holds");
    for (id, v) in verdicts(&r) {
        assert!(matches!(v.as_str(), "holds" | "vacuous" | "degenerate"), "{id}: {v}");
    }
}

#[test]
fn json_report_round_trips() {
    let text = stdout_ok(&["classify", "--metric", "charged_nariai", "--report", "json"]);
    let report: ClassificationReport = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap();
    let back: ClassificationReport = serde_json::from_str(&again).unwrap();
    assert_eq!(back, report);
    assert_eq!(serde_json::from_str::<Value>(&again).unwrap(), serde_json::from_str::<Value>(&text).unwrap());
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let args = ["classify", "--metric", "cns_type", "--xi", "2+sin(r)", "--h", "2+sin(theta)", "--report", "json"];
    assert_eq!(stdout_ok(&args), stdout_ok(&args));
}

#[test]
fn minkowski_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "mink.json",
        &serde_json::json!({
            "name": "flat",
            "coords": ["t", "x", "y", "z"],
            "params": {},
            "components": {"0,0": "-1", "1,1": "1", "2,2": "1", "3,3": "1"},
            "singular_locus": []
        }),
    );
    let r = json(&["classify", "--file", &f]);
    assert_eq!(verdict(&r, "flat"), "holds");
}

#[test]
fn missing_coords_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.json",
        &serde_json::json!({"name": "m", "components": {"0,0": "-1"}}),
    );
    let out = curvlab(&["classify", "--file", &f]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("coords"));

    let f = write(
        dir.path(),
        "short.json",
        &serde_json::json!({"name": "m", "coords": ["t", "x", "y"], "components": {"0,0": "-1"}}),
    );
    let out = curvlab(&["classify", "--file", &f]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("coords"));
}

#[test]
fn cns_from_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "cns.json",
        &serde_json::json!({
            "name": "charged_nariai",
            "coords": ["t", "r", "theta", "phi"],
            "params": {"r0": 1.0, "L0": 0.5},
            "components": {
                "0,0": "-(r0^2/L0)*sin(r)^2",
                "1,1": "r0^2/L0",
                "2,2": "r0^2",
                "3,3": "r0^2*sin(theta)^2"
            },
            "singular_locus": ["sin(r)", "sin(theta)"]
        }),
    );
    let from_file = json(&["classify", "--file", &f]);
    let builtin = json(&["classify", "--metric", "charged_nariai"]);
    assert_eq!(verdicts(&from_file), verdicts(&builtin));
}

#[test]
fn operational_errors_exit_nonzero() {
    assert!(!curvlab(&["classify", "--metric", "nope"]).status.success());
    assert!(!curvlab(&["classify", "--metric", "charged_nariai", "--params", "L0=3"]).status.success());
    assert!(!curvlab(&["classify", "--metric", "charged_nariai", "--params", "r0"]).status.success());
    assert!(!curvlab(&["classify"]).status.success());
}

#[test]
fn text_report_lists_every_structure_and_audits() {
    let text = stdout_ok(&["classify", "--metric", "charged_nariai"]);
    let r = json(&["classify", "--metric", "charged_nariai"]);
    for (id, v) in verdicts(&r) {
        assert!(
            text.lines().any(|l| l.split_whitespace().take(2).eq([id.as_str(), v.as_str()])),
            "no line for {id}"
        );
    }
    assert!(text.lines().any(|l| l.trim() == "audits"));
}

#[test]
fn structure_selection_filters_report() {
    let r = json(&["classify", "--metric", "charged_nariai", "--structures", "roter,semisym_R_*"]);
    let ids: Vec<String> = verdicts(&r).into_iter().map(|(id, _)| id).collect();
    assert!(ids.contains(&"roter".to_owned()));
    assert!(ids.iter().all(|id| id == "roter" || id.starts_with("semisym_R_")), "{ids:?}");
}

#[test]
fn metrics_lists_builtins() {
    let text = stdout_ok(&["metrics"]);
    for name in ["minkowski", "sphere_product", "nariai", "charged_nariai", "cns_type", "anti_nariai"] {
        assert!(text.contains(name), "{name}");
    }
}
