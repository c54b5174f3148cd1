use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pipeflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pipeflow")).args(args).output().expect("binary runs")
}

fn preset_json(name: &str) -> serde_json::Value {
    let seed = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../fuzz/corpus/scenario_json/{name}.json"));
    serde_json::from_str(&fs::read_to_string(seed).unwrap()).unwrap()
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> String {
    let path = dir.join(name);
    fs::write(&path, v.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_preset_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = pipeflow(&["run", "paper-iv-a-closed", "--out", out.to_str().unwrap(), "--grid", "48", "--horizon", "900", "--plant", "linear"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["timeseries.csv", "summary.json", "disturbance.svg", "density.svg", "flow.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["grid"], 48);
    assert_eq!(summary["plant"], "linear-canonical");
    assert!(String::from_utf8_lossy(&o.stdout).contains("paper-iv-a-closed"));
}

#[test]
fn several_scenarios_get_subdirectories() {
    let dir = tempfile::tempdir().unwrap();
    let o = pipeflow(&["run", "paper-iv-a-open", "paper-iv-b-open", "--out", dir.path().to_str().unwrap(), "--grid", "32", "--horizon", "300"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("paper-iv-a-open/timeseries.csv").is_file());
    assert!(dir.path().join("paper-iv-b-open/timeseries.csv").is_file());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |sub: &str| {
        let out = dir.path().join(sub);
        let o = pipeflow(&["run", "paper-iv-b-closed", "--out", out.to_str().unwrap(), "--horizon", "1800"]);
        assert!(o.status.success());
        fs::read(out.join("timeseries.csv")).unwrap()
    };
    assert_eq!(read("x"), read("y"));
}

#[test]
fn kernels_are_exported() {
    let dir = tempfile::tempdir().unwrap();
    let o = pipeflow(&["kernels", "paper-iv-a-closed", "--out", dir.path().to_str().unwrap(), "--grid", "40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in ["k11", "k12", "k21", "k22", "p11", "p12", "p21", "p22"] {
        let text = fs::read_to_string(dir.path().join(format!("{k}.csv"))).unwrap();
        assert_eq!(text.lines().next(), Some("xbar,xi,value"));
        // 41·42/2 nodes on a triangle plus the header
        assert_eq!(text.lines().count(), 41 * 42 / 2 + 1, "{k}");
    }
    let gains: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("gains.json")).unwrap()).unwrap();
    assert_eq!(gains["k"].as_array().unwrap().len(), 2);
}

#[test]
fn validate_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_json(dir.path(), "good.json", &preset_json("paper-iv-a-open"));
    assert_eq!(pipeflow(&["validate", &good]).status.code(), Some(0));

    let mut v = preset_json("paper-iv-a-open");
    v.as_object_mut().unwrap().remove("horizon");
    let missing = write_json(dir.path(), "missing.json", &v);
    let o = pipeflow(&["validate", &missing]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("horizon"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"version\": 1,\n  \"grid\": ]").unwrap();
    let o = pipeflow(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = pipeflow(&["validate", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_override_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = pipeflow(&["run", "paper-iv-a-open", "--out", dir.path().to_str().unwrap(), "--grid", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = preset_json("paper-iv-a-open");
    v["exosystem"]["x0"] = serde_json::json!([0.0, 0.2]);
    v["horizon"] = 7200.0.into();
    v["grid"] = 64.into();
    let file = write_json(dir.path(), "huge.json", &v);
    let o = pipeflow(&["run", &file, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
