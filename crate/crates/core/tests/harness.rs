use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use dirac_core::harness::verify::group_names;
use dirac_core::harness::{error_json, run, verify_suite, ExperimentConfig, Fault, GroupStatus, VerifyOptions};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dirac-harness-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn config(mut v: Value, dir: &Path) -> ExperimentConfig {
    v["output_dir"] = json!(dir);
    ExperimentConfig::from_value(&v).unwrap()
}

fn torus(n: usize) -> Value {
    json!({ "n": n, "box_length": std::f64::consts::TAU })
}

fn tiny(kind: &str) -> Value {
    let smooth = json!({ "kind": "smooth_random", "width": 2.0, "norm": 1.0 });
    match kind {
        "simulate" => json!({ "kind": kind, "seed": 1, "grid": torus(16), "params": { "kappa": 0.0 },
            "parameters": { "t_final": 0.5, "dt": 0.05, "initial": smooth } }),
        "picard" => json!({ "kind": kind, "seed": 2, "grid": torus(16),
            "parameters": { "t_final": 0.2, "n_iter": 4, "quadrature_points": 9, "delta": 0.1,
                            "initial": { "kind": "smooth_random", "width": 2.0, "norm": 0.05 } } }),
        "convergence" => json!({ "kind": kind, "seed": 3, "grid": torus(16),
            "parameters": { "t_final": 0.2, "dt": 0.05, "initial": smooth } }),
        "l4-cone" => json!({ "kind": kind, "seed": 4,
            "parameters": { "n": 16, "nt": 16, "dk": 16.0, "trials": 1, "ascent_iters": 2 } }),
        "bilinear" => json!({ "kind": kind, "seed": 5,
            "parameters": { "n": 16, "nt": 16, "cells": 4, "trials": 1, "ascent_iters": 2, "mus": [4.0, 8.0, 16.0] } }),
        "illposed-sweep" => json!({ "kind": kind, "seed": 6,
            "parameters": { "s": 0.25, "ell": 1, "cells_per_half_width": 2, "lambdas": [8, 16, 32] } }),
        _ => unreachable!(),
    }
}

const KINDS: [&str; 6] = ["simulate", "picard", "convergence", "l4-cone", "bilinear", "illposed-sweep"];

fn csv_rows(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

#[test]
fn every_kind_writes_its_artifacts() {
    for kind in KINDS {
        let dir = scratch(kind);
        let out = run(&config(tiny(kind), &dir)).unwrap();
        for f in ["report.csv", "summary.json", "timing.json"] {
            assert!(dir.join(f).is_file(), "{kind}: {f} missing");
        }
        assert!(csv_rows(&dir.join("report.csv")) > 0, "{kind}");
        assert_eq!(out.summary["kind"], kind);
        let echo = ExperimentConfig::from_value(&out.summary["config"]).unwrap();
        assert_eq!(echo, config(tiny(kind), &dir), "{kind}: echo is lossy");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

#[test]
fn free_simulation_conserves_charge_and_checkpoints() {
    let dir = scratch("free");
    let out = run(&config(tiny("simulate"), &dir)).unwrap();
    assert!(out.summary["results"]["charge_drift_relative"].as_f64().unwrap() <= 1e-12);
    let f: dirac_core::spectral_core::SpinorField = dirac_core::spectral_core::checkpoint::load(&dir.join("final.dhc")).unwrap();
    assert_eq!(f.grid().n(), 16);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reruns_are_byte_identical() {
    for kind in ["simulate", "l4-cone", "illposed-sweep"] {
        let dir = scratch(&format!("rerun-{kind}"));
        let cfg = config(tiny(kind), &dir);
        run(&cfg).unwrap();
        let first: Vec<Vec<u8>> = ["report.csv", "summary.json"].iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
        run(&cfg).unwrap();
        let second: Vec<Vec<u8>> = ["report.csv", "summary.json"].iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
        assert_eq!(first, second, "{kind}");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

#[cfg(feature = "parallel")]
#[test]
fn fitted_slopes_do_not_depend_on_the_thread_count() {
    let slopes = |threads: usize| -> Vec<f64> {
        let dir = scratch(&format!("threads-{threads}"));
        let cfg = config(tiny("l4-cone"), &dir);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let out = pool.install(|| run(&cfg)).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
        out.summary["results"]["sweeps"].as_array().unwrap().iter().map(|s| s["fitted_slope"].as_f64().unwrap()).collect()
    };
    let (a, b) = (slopes(1), slopes(3));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12, "{a:?} vs {b:?}");
    }
}

#[test]
fn shipped_illposed_config_gives_four_rows_and_a_slope() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/illposed-sweep.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(root).unwrap()).unwrap();
    let dir = scratch("shipped-illposed");
    let out = run(&config(v, &dir)).unwrap();
    assert_eq!(csv_rows(&dir.join("report.csv")), 4);
    let r = &out.summary["results"];
    assert!(r["fitted_slope"].as_f64().unwrap().is_finite());
    assert!(r["slope_stderr"].as_f64().unwrap().is_finite());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn every_shipped_config_validates() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        seen += 1;
    }
    assert_eq!(seen, KINDS.len());
}

#[test]
fn unknown_kind_is_a_validation_error_naming_the_field() {
    let e = ExperimentConfig::from_json_str(r#"{"kind":"teleport","seed":1,"output_dir":"x"}"#).unwrap_err();
    let v = error_json(&e);
    assert_eq!(v["error"]["kind"], "validation");
    assert_eq!(v["error"]["issues"][0]["key"], "kind");
}

#[test]
fn missing_seed_is_rejected() {
    let mut v = tiny("simulate");
    v["output_dir"] = json!("x");
    v.as_object_mut().unwrap().remove("seed");
    let e = ExperimentConfig::from_value(&v).unwrap_err();
    assert!(error_json(&e)["error"]["issues"].as_array().unwrap().iter().any(|i| i["key"] == "seed"));
}

#[test]
fn verify_pinpoints_a_corrupted_projection() {
    let clean = verify_suite(&VerifyOptions::default(), |_| {});
    assert!(clean.passed(), "{:#?}", clean.lines());
    assert_eq!(clean.groups.len(), group_names().len());

    let broken = verify_suite(&VerifyOptions { inject_fault: Some(Fault::ProjectionSign) }, |_| {});
    assert!(!broken.passed());
    let failed: Vec<&str> = broken.groups.iter().filter(|g| matches!(g.status, GroupStatus::Failed)).map(|g| g.name).collect();
    assert_eq!(failed, ["projection-algebra"]);
    for name in ["grid-fft", "propagator", "xsb"] {
        assert!(matches!(broken.group(name).unwrap().status, GroupStatus::Passed), "{name}");
    }
    assert!(matches!(broken.group("conservation").unwrap().status, GroupStatus::Skipped(_)));
}
