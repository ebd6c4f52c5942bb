use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sdl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdl"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("SDL_SEED")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn scenario_file(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    p.to_str().unwrap().to_string()
}

const J2: &str = r#"{"dim": 2, "entries": [[0, 0], [1, 0], [0, 0], [0, 0]]}"#;

#[test]
fn numrange_of_j2_is_the_half_disc() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "j2.json", J2);
    let out = sdl(&["numrange", &m, "--m", "360"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(dir.path().join("numrange.json"));
    assert_eq!(r["m"], 360);
    for h in r["support"].as_array().unwrap() {
        assert!((h.as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
    let svg = fs::read_to_string(dir.path().join("numrange.svg")).unwrap();
    assert!(svg.contains("<polyline"));
    let points: Vec<&str> = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap().split(' ').collect();
    assert_eq!(points.len(), 361);
    assert_eq!(points[0], points[360]);
}

#[test]
fn numrange_of_a_diagonal_is_a_segment() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "d.json", r#"{"dim": 2, "entries": [[0, 0], [0, 0], [0, 0], [1, 0]]}"#);
    assert!(sdl(&["numrange", &m, "--m", "64"], dir.path()).status.success());
    let r = json(dir.path().join("numrange.json"));
    for w in r["witness"].as_array().unwrap() {
        let (x, y) = (w[0].as_f64().unwrap(), w[1].as_f64().unwrap());
        assert!(y.abs() < 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&x));
    }
}

#[test]
fn malformed_input_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "bad.json", r#"{"dim": 2, "entries": [[0, 0]"#);
    let out_dir = dir.path().join("out");
    let out = sdl(&["numrange", &m], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
    let m = write(dir.path(), "extra.json", r#"{"dim": 1, "entries": [[0, 0]], "note": 1}"#);
    assert_eq!(sdl(&["numrange", &m], &out_dir).status.code(), Some(2));
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "j2.json", J2);
    fs::write(dir.path().join("numrange.svg"), "keep").unwrap();
    let out = sdl(&["numrange", &m, "--m", "64"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_to_string(dir.path().join("numrange.svg")).unwrap(), "keep");
    assert!(!dir.path().join("numrange.json").exists());
    assert!(sdl(&["numrange", &m, "--m", "64", "--force"], dir.path()).status.success());
    assert!(fs::read_to_string(dir.path().join("numrange.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn format_flags_select_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "j2.json", J2);
    assert!(sdl(&["numrange", &m, "--format", "svg"], dir.path()).status.success());
    assert!(dir.path().join("numrange.svg").exists());
    assert!(!dir.path().join("numrange.json").exists());
}

#[test]
fn decompose_upper_triangular() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "t.json", r#"{"dim": 2, "entries": [[0, 0], [1, 0], [0, 0], [5, 0]]}"#);
    let c = write(
        dir.path(),
        "c.json",
        r#"{"contours": [{"center": [0, 0], "radius": 1}, {"center": [5, 0], "radius": 1, "nodes": 256}]}"#,
    );
    let out = sdl(&["decompose", &m, "--contours", &c], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(dir.path().join("system.json"));
    for key in ["idempotent_residuals", "commutation_residuals", "off_block_residual", "block_hull_residual"] {
        assert!(r[key].as_f64().unwrap() <= 1e-8, "{key}");
    }
    let spectra = r["block_spectra"].as_array().unwrap();
    assert!(spectra[0][0][0].as_f64().unwrap().abs() < 1e-8);
    assert!((spectra[1][0][0].as_f64().unwrap() - 5.0).abs() < 1e-8);
    let blocks = json(dir.path().join("blocks.json"));
    assert_eq!(blocks.as_array().unwrap().len(), 2);
    assert!(dir.path().join("hull.svg").exists());
}

#[test]
fn decompose_block_diagonal_needs_no_similarity() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "t.json", r#"{"dim": 2, "entries": [[0, 0], [0, 0], [0, 0], [5, 0]]}"#);
    assert!(sdl(&["decompose", &m], dir.path()).status.success());
    let s = json(dir.path().join("similarity.json"));
    let e = s["entries"].as_array().unwrap();
    let id = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
    for (a, b) in e.iter().zip(id) {
        assert!((a[0].as_f64().unwrap() - b[0]).abs() < 1e-9 && (a[1].as_f64().unwrap() - b[1]).abs() < 1e-9);
    }
}

#[test]
fn contour_through_an_eigenvalue_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "t.json", r#"{"dim": 2, "entries": [[0, 0], [1, 0], [0, 0], [5, 0]]}"#);
    let c = write(dir.path(), "c.json", r#"{"contours": [{"center": [0, 0], "radius": 5}]}"#);
    let out = sdl(&["decompose", &m, "--contours", &c], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!dir.path().join("system.json").exists());
}

#[test]
fn dilation_reports_the_semispectral_density() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "t.json", r#"{"dim": 2, "entries": [[0, 0], [0.9, 0], [0, 0], [0, 0]]}"#);
    let c = write(dir.path(), "e.json", r#"{"kind": "ellipse", "params": {"center": [0, 0], "a": 2, "b": 1}}"#);
    let out = sdl(&["dilation", &m, "--curve", &c, "-M", "512"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(dir.path().join("dilation.json"));
    assert!(r["sum_error"].as_f64().unwrap() <= 1e-8);
    assert!(r["min_eigenvalue"].as_f64().unwrap() >= -1e-10);
    for e in r["reconstruction_errors"].as_array().unwrap() {
        assert!(e.as_f64().unwrap() <= 1e-6);
    }
    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(grid.starts_with("t,re_z,im_z,re_n,im_n,w,kappa\n"));
    assert_eq!(grid.lines().count(), 513);
}

#[test]
fn dilation_too_close_to_the_boundary_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "t.json", r#"{"dim": 2, "entries": [[0, 0], [2, 0], [0, 0], [0, 0]]}"#);
    let c = write(dir.path(), "d.json", r#"{"kind": "disc", "params": {"center": [0, 0], "radius": 1}}"#);
    assert_eq!(sdl(&["dilation", &m, "--curve", &c], dir.path()).status.code(), Some(3));
}

#[test]
fn kbound_writes_estimate_and_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "j2.json", J2);
    let cfg = write(dir.path(), "cfg.json", r#"{"degrees": [2, 4], "restarts": 4, "steps": 40}"#);
    let out = sdl(&["kbound", &m, "--config", &cfg, "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(dir.path().join("kbound.json"));
    let k = r["k_hat"].as_f64().unwrap();
    assert!(k.is_finite() && k >= 1.0 - 1e-12);
    assert!(r["certificate"]["num"].is_array());
    let csv = fs::read_to_string(dir.path().join("kbound.csv")).unwrap();
    assert!(csv.starts_with("restart,ratio\n"));
}

#[test]
fn gleason_distance_and_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = sdl(
        &["gleason", "--domain", "disc", "--x1", "0,0", "--x2", "0.5,0", "--degree", "6", "--restarts", "2", "--catalog"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(dir.path().join("distance.json"));
    let d = r["d_hat"].as_f64().unwrap();
    assert!(d > 0.4 && d <= 0.5360);
    assert!(r["verification_sup"].as_f64().unwrap() <= 1.0 + 1e-9);
    let generated = fs::read_to_string(dir.path().join("domains.json")).unwrap();
    let shipped = fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/domains.json")).unwrap();
    assert_eq!(generated, shipped);
    assert_eq!(sdl(&["gleason", "--domain", "nowhere", "--x1", "0", "--x2", "0.1"], dir.path()).status.code(), Some(2));
    assert_eq!(sdl(&["gleason", "--domain", "disc", "--x1", "0", "--x2", "2"], dir.path()).status.code(), Some(3));
}

#[test]
fn bundled_hull_and_von_neumann_scenarios_pass() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["hull_identity", "von_neumann"] {
        let out = sdl(&["scenario", &scenario_file(&format!("{name}.json"))], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let r = json(dir.path().join(format!("{name}.report.json")));
        assert_eq!(r["passed"], true);
        assert!(dir.path().join(format!("{name}.trials.csv")).exists());
    }
}

#[test]
fn impossible_margin_records_violations_and_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = sdl(&["scenario", &scenario_file("impossible_margin.json")], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let r = json(dir.path().join("impossible_margin.report.json"));
    assert_eq!(r["passed"], false);
    let trials = r["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 5);
    assert!(trials.iter().all(|t| t["status"] == "error" && t["error"] == "RegionViolation"));
}

#[test]
fn seed_environment_variable_overrides_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sdl"))
        .args(["scenario", &scenario_file("hull_identity.json"), "--out"])
        .arg(dir.path())
        .env("SDL_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    let r = json(dir.path().join("hull_identity.report.json"));
    assert_eq!(r["scenario"]["seed"], 99);
}

#[test]
fn invalid_scenarios_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", r#"{"schema_version": 1, "kind": "hull_identity", "seed": 1, "trials": 1, "x": 0}"#);
    assert_eq!(sdl(&["scenario", &s], dir.path()).status.code(), Some(2));
    let s = write(dir.path(), "s.json", r#"{"schema_version": 1, "kind": "teleport", "seed": 1, "trials": 1}"#);
    assert_eq!(sdl(&["scenario", &s], dir.path()).status.code(), Some(2));
}
