use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn meshcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meshcert"))
        .args(args)
        .env_remove("MESHCERT_OUT_DIR")
        .output()
        .expect("spawn meshcert")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

const EQUILATERAL: &str = r#"{"format": "meshcert-mesh", "version": 1, "dim": 2,
 "points": [[0, 0], [1, 0], [0.5, 0.8660254037844386]], "simplices": [[0, 1, 2]]}"#;

const SQUARE: &str = r#"{"format": "meshcert-mesh", "version": 1, "dim": 2,
 "points": [[0, 0], [1, 0], [1, 1], [0, 1]], "simplices": []}"#;

#[test]
fn missing_mesh_exits_2_naming_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let out = meshcert(&["report", "--mesh", s(&missing), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(s(&missing)));
}

#[test]
fn malformed_mesh_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"format\": \"meshcert-mesh\", \"version\": 1, \"dim\": 2,\n \"points\": [[0, 0], [1]], \"simplices\": []}");
    let out = meshcert(&["report", "--mesh", s(&bad), "--out", s(&dir.path().join("r.json"))]);
    assert_ne!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("points[1]"), "{err}");

    let bad = write(dir.path(), "trunc.json", "{\"dim\": 2,\n \"points\": [[0, 0]");
    let out = meshcert(&["report", "--mesh", s(&bad), "--out", s(&dir.path().join("r.json"))]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn equilateral_report_constants() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write(dir.path(), "eq.json", EQUILATERAL);
    let out_path = dir.path().join("r.json");
    let out = meshcert(&["report", "--mesh", s(&mesh), "--degree", "1", "--out", s(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out_path)["report"];
    let close = |key: &str, want: f64| {
        let got = r[key].as_f64().unwrap();
        assert!((got - want).abs() < 1e-6, "{key}: {got} vs {want}");
    };
    close("c1", 0.75);
    close("c2", 3f64.sqrt());
    close("theta", 0.75 * 3f64.sqrt());
    assert_eq!(r["anchors"]["c1"], "sliver_constant");
}

#[test]
fn square_is_triangulated_with_zero_protection() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "sq.json", SQUARE);
    let tri = dir.path().join("tri.json");
    assert!(meshcert(&["delaunay", "--mesh", s(&pts), "--out", s(&tri)]).status.success());
    let rep = dir.path().join("r.json");
    assert!(meshcert(&["report", "--mesh", s(&tri), "--out", s(&rep)]).status.success());
    let delta = json(&rep)["report"]["delta"].as_f64().unwrap();
    assert!(delta.abs() <= 1e-12, "delta {delta}");
}

#[test]
fn verify_coxeter_trig_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("v.json");
    let out = meshcert(&["verify", "--dim", "2", "--degree", "2", "--field", "trig", "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out_path);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn corrupted_c1_fails_on_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("v.json");
    let out = meshcert(&["verify", "--dim", "2", "--degree", "2", "--corrupt-c1", "10", "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("functional_equivalence"));
    // The report is still written.
    assert_eq!(json(&out_path)["passed"], false);
}

#[test]
fn zero_field_passes_with_zero_lhs() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("v.json");
    let out = meshcert(&["verify", "--dim", "2", "--degree", "1", "--field", "zero", "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    for c in json(&out_path)["checks"].as_array().unwrap() {
        assert_eq!(c["lhs"].as_f64(), Some(0.0), "{c}");
    }
}

#[test]
fn interp_study_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = meshcert(&["interp-study", "--dim", "2", "--degree", "1", "--levels", "3", "--out", s(&out_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(!text.contains('\r'));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "level,h,l2_error,sup_error,psi_error,bound_rhs,lambda,theta,c1,c3");
    assert_eq!(data.len(), 4);
    for row in &data[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 10);
        // bound column dominates the error column
        assert!(cols[5] >= cols[2]);
    }
    assert!(text.contains("# degree=1"));
    let slope: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# observed_slope_l2_error="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(slope >= 1.8, "slope {slope}");
}

#[test]
fn single_level_study_warns() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = meshcert(&["interp-study", "--dim", "2", "--degree", "1", "--levels", "1", "--out", s(&out_path)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(!fs::read_to_string(&out_path).unwrap().contains("observed_slope"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("net.json");
    let tri = dir.path().join("tri.json");
    assert!(meshcert(&["gen-random-net", "--dim", "2", "--count", "40", "--seed", "7", "--out", s(&mesh)]).status.success());
    assert!(meshcert(&["delaunay", "--mesh", s(&mesh), "--out", s(&tri)]).status.success());
    let runs: [&[&str]; 3] = [
        &["report", "--mesh", s(&tri), "--seed", "3", "--threads", "3"],
        &["verify", "--mesh", s(&tri), "--degree", "2", "--seed", "3", "--threads", "3"],
        &["interp-study", "--dim", "2", "--degree", "1", "--levels", "2", "--seed", "3", "--threads", "3"],
    ];
    let out_path = dir.path().join("out");
    for args in runs {
        let mut all: Vec<&str> = args.to_vec();
        all.extend(["--out", s(&out_path)]);
        let first = {
            assert!(meshcert(&all).status.code().is_some_and(|c| c <= 1));
            fs::read(&out_path).unwrap()
        };
        assert!(meshcert(&all).status.code().is_some_and(|c| c <= 1));
        assert_eq!(first, fs::read(&out_path).unwrap(), "{}", args[0]);
    }
}

#[test]
fn config_file_precedence_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"dim": 2, "degree": 3, "layers": 2, "seed": 11}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_meshcert"))
        .args(["report", "--config", s(&cfg), "--degree", "1"])
        .env("MESHCERT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c = &json(&dir.path().join("report.json"))["config"];
    assert_eq!(c["degree"], 1); // flag beats file
    assert_eq!(c["seed"], 11); // file beats default
    assert_eq!(c["layers"], 2);
    assert_eq!(c["field"], "trig"); // default

    let bad = write(dir.path(), "bad.json", r#"{"degre": 2}"#);
    let out = meshcert(&["report", "--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_coxeter_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("cox.json");
    assert!(meshcert(&["gen-coxeter", "--dim", "3", "--layers", "2", "--out", s(&mesh)]).status.success());
    let m = json(&mesh);
    assert_eq!(m["dim"], 3);
    assert!(!m["simplices"].as_array().unwrap().is_empty());
}
