use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mcflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcflab")).args(args).output().expect("binary runs")
}

fn report(dir: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{command}.json"))).expect("report written");
    serde_json::from_str(&text).expect("valid json")
}

fn without_timestamps(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamps");
    v
}

#[test]
fn entropy_of_the_shrinker_circle() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&["entropy", "--preset", "shrinker-circle", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "entropy");
    let e = r["result"][0]["entropy"]["value"].as_f64().unwrap();
    assert!((e - (std::f64::consts::TAU / std::f64::consts::E).sqrt()).abs() < 1e-2, "{e}");
    assert!(r["version"].as_str().unwrap().starts_with("mcflab-cli"));
    assert_eq!(r["config"]["preset"], "shrinker-circle");
    assert!(dir.path().join("entropy.csv").exists());
    assert!(dir.path().join("entropy_slice_0.svg").exists());
}

#[test]
fn stone_check_spheres_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&["entropy", "--preset", "stone-check-spheres", "--no-plot", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rows = csv::Reader::from_path(dir.path().join("entropy.csv")).unwrap();
    let headers = rows.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (ie, is) = (col("entropy"), col("stone_entropy"));
    let mut n = 0;
    for rec in rows.records() {
        let rec = rec.unwrap();
        let e: f64 = rec[ie].parse().unwrap();
        let s: f64 = rec[is].parse().unwrap();
        assert!((e - s).abs() < 1e-2, "{e} vs {s}");
        n += 1;
    }
    assert_eq!(n, 2);
}

#[test]
fn unknown_preset_lists_the_catalog() {
    let out = mcflab(&["entropy", "--preset", "no-such-shape"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("shrinker-circle") && err.contains("dumbbell"), "{err}");
}

#[test]
fn reports_are_deterministic_apart_from_timestamps() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = a.path().join("exp.toml");
    std::fs::write(&config, "preset = \"perturbed-shrinker-circle\"\nout = \"unused\"\n[opt]\nrestarts = 6\n").unwrap();
    for dir in [&a, &b] {
        let out = mcflab(&[
            "entropy",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "7",
            "--no-plot",
            "--out",
            "shared-out-name",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::rename("shared-out-name", dir.path().join("run")).unwrap();
    }
    let ra = report(&a.path().join("run"), "entropy");
    let rb = report(&b.path().join("run"), "entropy");
    assert_eq!(ra["config"]["seed"], 7);
    assert_eq!(ra["config"]["opt"]["restarts"], 6);
    assert!(ra["timestamps"]["started_unix_ms"].is_u64());
    assert_eq!(
        serde_json::to_string(&without_timestamps(ra)).unwrap(),
        serde_json::to_string(&without_timestamps(rb)).unwrap()
    );
}

#[test]
fn renormalized_shrinker_flow_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&[
        "flow",
        "--preset",
        "shrinker-circle",
        "--field",
        "renormalizing",
        "-T",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "flow");
    assert_eq!(r["result"]["status"], "completed");
    assert!(r["result"]["gaussian_area_range"].as_f64().unwrap() < 1e-3);
    for f in ["flow.csv", "f_vs_t.svg", "radius_vs_t.svg", "trajectory/index.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn avoidance_series_of_concentric_circles() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&[
        "flow",
        "--preset",
        "circle-r1",
        "--against",
        "circle-r2",
        "-T",
        "0.4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "flow");
    assert!(r["result"]["avoidance"]["worst_decrease"].as_f64().unwrap() <= 1e-3);
    assert!(dir.path().join("distance_vs_t.svg").exists());
}

#[test]
fn flow_without_horizon_is_an_error() {
    let out = mcflab(&["flow", "--preset", "circle-r1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizon"));
}

#[test]
fn levelset_disc_goes_extinct_with_a_spherical_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&[
        "levelset",
        "--preset",
        "circle-r1",
        "-T",
        "0.7",
        "--grid-h",
        "0.0625",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "levelset");
    assert_eq!(r["result"]["status"], "extinct");
    let te = r["result"]["extinction_time"].as_f64().unwrap();
    assert!((te - 0.5).abs() < 0.05, "{te}");
    assert!(dir.path().join("final_phi.json").exists());
    assert!(dir.path().join("levelset.csv").exists());
}

#[test]
fn parametric_singularity_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&[
        "singularity",
        "--method",
        "parametric",
        "--preset",
        "circle-r1",
        "-T",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "singularity");
    let s = &r["result"]["singularities"];
    assert_eq!(s["classifications"][0]["label"]["type"], "spherical");
    assert_eq!(s["chain"]["holds"], true);
    assert!(dir.path().join("density_0.svg").exists());
}

#[test]
fn residual_of_the_shrinker_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&["residual", "--preset", "shrinker-sphere", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "residual");
    assert!(r["result"][0]["sup_norm"].as_f64().unwrap() <= 5e-2);
    assert!(dir.path().join("residual_0.csv").exists());
}

#[test]
fn shape_round_trips_through_mesh_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(mcflab(&["shape", "--preset", "shrinker-circle", "--out", d]).status.success());
    let manifest = dir.path().join("shape_0.json");
    let out = mcflab(&["residual", "--mesh", manifest.to_str().unwrap(), "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "residual");
    assert!(r["result"][0]["sup_norm"].as_f64().unwrap() <= 5e-3);
}

#[test]
fn bad_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "preset = \"shrinker-circle\"\nbogus = 1\n").unwrap();
    let out = mcflab(&["entropy", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn dumbbell_auto_horizon_finds_the_neck_pinch() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcflab(&["levelset", "--preset", "dumbbell", "-T", "auto", "--no-plot", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(dir.path(), "levelset");
    let s = &r["result"]["singularities"];
    assert_eq!(s["classifications"][0]["j"], 1);
    assert_eq!(s["chain"]["holds"], true);
}
