//! Dispatch of one configured experiment and persistence of its artifacts.
//!
//! Every run writes into `output_dir`:
//! - `report.csv`: one row per measurement,
//! - `summary.json`: config echo, version stamp and fitted quantities,
//! - `timing.json`: wall-clock time (kept apart so that `summary.json` and
//!   `report.csv` are byte-identical across repeated runs),
//! - checkpoints, for the kinds that produce fields.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{ConvergenceBlock, ExperimentConfig, Parameters, PicardBlock, SimulateBlock};
use crate::error::{Error, Result};
use crate::evolution::{evolve, evolve_to, picard_iterate, split_initial_data, write_diagnostics_csv};
use crate::illposedness_probe::{smoothness_failure_sweep, IllposedReport, IllposednessConfig};
use crate::spectral_core::{checkpoint, sobolev_norm, DiracParams, Grid2D};
use crate::xsb_probe::{bilinear_product_experiment, l4_cone_experiment, ExperimentReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance on fitted slopes used for the `within_tolerance` flags of the
/// bilinear and L⁴ summaries.
pub const SLOPE_TOLERANCE: f64 = 0.1;
/// Same for the smoothness-failure sweep.
pub const ILLPOSED_SLOPE_TOLERANCE: f64 = 0.15;

/// Result of [`run`]: where the artifacts went and the kind-specific summary.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
    pub wall_clock_seconds: f64,
}

/// Machine-readable error report.
pub fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    if let Error::Validation(issues) = e {
        v["error"]["issues"] = serde_json::to_value(issues).unwrap_or(Value::Null);
    }
    v
}

pub fn run_path(config_path: &Path) -> Result<RunOutcome> {
    run(&ExperimentConfig::load(config_path)?)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let grid = || cfg.grid.ok_or_else(|| Error::invalid("grid", "required for this kind"));
    let results = match &cfg.parameters {
        Parameters::Simulate(b) => simulate(b, grid()?, &cfg.params, cfg.seed, &dir, &mut files)?,
        Parameters::Picard(b) => picard(b, grid()?, &cfg.params, cfg.seed, &dir, &mut files)?,
        Parameters::Convergence(b) => convergence(b, grid()?, &cfg.params, cfg.seed, &dir, &mut files)?,
        Parameters::L4Cone(b) => {
            let c = crate::xsb_probe::L4ConeConfig { seed: cfg.seed, ..b.clone() };
            xsb_report(&l4_cone_experiment(&c)?, &dir, &mut files)?
        }
        Parameters::Bilinear(b) => {
            let c = crate::xsb_probe::BilinearConfig { seed: cfg.seed, ..b.clone() };
            xsb_report(&bilinear_product_experiment(&c)?, &dir, &mut files)?
        }
        Parameters::IllposedSweep(b) => {
            let c = IllposednessConfig { params: cfg.params, ..b.clone() };
            illposed_report(&smoothness_failure_sweep(&c)?, &dir, &mut files)?
        }
    };
    let summary = json!({
        "version": VERSION,
        "kind": cfg.kind.name(),
        "config": cfg.to_value(),
        "results": results,
    });
    let path = dir.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
    files.push(path);
    let wall = start.elapsed().as_secs_f64();
    let path = dir.join("timing.json");
    std::fs::write(&path, serde_json::to_string_pretty(&json!({ "version": VERSION, "wall_clock_seconds": wall }))? + "\n")?;
    files.push(path);
    Ok(RunOutcome { output_dir: dir, files, summary, wall_clock_seconds: wall })
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn step_count(t: f64, dt: f64) -> Result<usize> {
    let steps = (t / dt).round();
    if steps < 1.0 || ((steps * dt) - t).abs() > 1e-9 * t {
        return Err(Error::invalid("parameters.dt", format!("t_final = {t} is not a whole number of steps dt = {dt}")));
    }
    Ok(steps as usize)
}

fn simulate(b: &SimulateBlock, grid: Grid2D, p: &DiracParams, seed: u64, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let steps = step_count(b.t_final, b.dt)?;
    let psi0 = b.initial.build(grid, seed)?;
    let s0 = split_initial_data(&psi0, p);
    let (s1, rows) = evolve(&s0, b.dt, steps, p, &b.sobolev_indices, b.diagnostics_every)?;
    let path = dir.join("report.csv");
    write_diagnostics_csv(&rows, &b.sobolev_indices, std::fs::File::create(&path)?)?;
    files.push(path);
    if b.checkpoints {
        for (name, f) in [("initial.dhc", psi0), ("final.dhc", s1.psi())] {
            let path = dir.join(name);
            checkpoint::save(&f, &path)?;
            files.push(path);
        }
    }
    let q0 = rows[0].charge;
    let drift = rows.iter().map(|r| (r.charge - q0).abs()).fold(0.0, f64::max);
    Ok(json!({
        "steps": steps,
        "final_time": s1.time,
        "charge_initial": q0,
        "charge_final": rows.last().unwrap().charge,
        "charge_drift_max": drift,
        "charge_drift_relative": if q0 > 0.0 { drift / q0 } else { drift },
    }))
}

#[derive(Serialize)]
struct PicardRow {
    iteration: usize,
    residual: f64,
    ratio: f64,
}

fn picard(b: &PicardBlock, grid: Grid2D, p: &DiracParams, seed: u64, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let cfg = b.picard_config();
    let mut psi0 = b.initial.build(grid, seed)?;
    let norm = sobolev_norm(&psi0, b.s, false)?;
    if norm == 0.0 {
        return Err(Error::Undefined("Picard data has zero norm".into()));
    }
    psi0.scale(Complex64::new(b.delta / norm, 0.0));
    let r = picard_iterate(&psi0, &cfg, p)?;
    let ratios = r.ratios();
    let rows: Vec<PicardRow> = r
        .residuals
        .iter()
        .enumerate()
        .map(|(k, &res)| PicardRow { iteration: k, residual: res, ratio: if k == 0 { f64::NAN } else { ratios[k - 1] } })
        .collect();
    let path = dir.join("report.csv");
    write_rows(&rows, &path)?;
    files.push(path);
    let contracting = ratios.iter().take(6).all(|&q| q < 1.0);
    let mut out = json!({
        "residuals": r.residuals,
        "ratios": ratios,
        "contracting_first_six": contracting,
        "diverged": r.diverged,
    });
    if b.compare_strang {
        let h = cfg.t_final / (cfg.quadrature_points - 1) as f64;
        let strang = evolve_to(&split_initial_data(&psi0, p), cfg.t_final, h, p)?.psi();
        let limit = r.final_state().psi();
        let diff = limit.sub(&strang)?;
        out["strang_dt"] = json!(h);
        out["picard_vs_strang_relative"] = json!(diff.l2_norm() / limit.l2_norm());
    }
    let path = dir.join("picard_final.dhc");
    checkpoint::save(&r.final_state().psi(), &path)?;
    files.push(path);
    Ok(out)
}

#[derive(Serialize)]
struct ConvergenceRow {
    dt: f64,
    difference_to_half_step: f64,
}

fn convergence(b: &ConvergenceBlock, grid: Grid2D, p: &DiracParams, seed: u64, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let psi0 = b.initial.build(grid, seed)?;
    let s0 = split_initial_data(&psi0, p);
    let u = crate::par::map_range(3, |k| evolve_to(&s0, b.t_final, b.dt / (1 << k) as f64, p).map(|s| s.psi()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let e1 = u[0].sub(&u[1])?.l2_norm();
    let e2 = u[1].sub(&u[2])?.l2_norm();
    let rows = [ConvergenceRow { dt: b.dt, difference_to_half_step: e1 }, ConvergenceRow { dt: 0.5 * b.dt, difference_to_half_step: e2 }];
    let path = dir.join("report.csv");
    write_rows(&rows, &path)?;
    files.push(path);
    let order = (e1 / e2).log2();
    if !order.is_finite() {
        return Err(Error::Undefined(format!("convergence order from differences {e1:e}, {e2:e}")));
    }
    Ok(json!({ "order": order, "differences": [e1, e2] }))
}

fn xsb_report(rep: &ExperimentReport, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let path = dir.join("report.csv");
    write_rows(&rep.rows(), &path)?;
    files.push(path);
    let sweeps: Vec<Value> = rep
        .sweeps
        .iter()
        .map(|s| {
            json!({
                "sign_pair": s.sign_pair,
                "param_name": s.param_name,
                "fitted_slope": s.fit.slope,
                "slope_stderr": s.fit.slope_stderr,
                "target_slope": s.target_slope,
                "within_tolerance": s.within(SLOPE_TOLERANCE),
                "max_ratio": s.maxima.iter().cloned().fold(0.0, f64::max),
            })
        })
        .collect();
    Ok(json!({ "experiment": rep.experiment, "tolerance": SLOPE_TOLERANCE, "sweeps": sweeps }))
}

fn illposed_report(rep: &IllposedReport, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Value> {
    let path = dir.join("report.csv");
    write_rows(&rep.rows, &path)?;
    files.push(path);
    Ok(json!({
        "fitted_slope": rep.fit.slope,
        "slope_stderr": rep.fit.slope_stderr,
        "predicted_slope": rep.predicted_slope,
        "slope_sign": rep.slope_sign(),
        "within_tolerance": (rep.fit.slope - rep.predicted_slope).abs() <= ILLPOSED_SLOPE_TOLERANCE,
        "tolerance": ILLPOSED_SLOPE_TOLERANCE,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("dirac-run-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn free_simulation_keeps_charge() {
        let dir = tmp("free");
        let text = format!(
            r#"{{"kind":"simulate","seed":4,"output_dir":{:?},"grid":{{"n":16,"box_length":6.283185307179586}},
               "params":{{"kappa":0.0,"lambda_sharp":[1.0,0.0],"b1":1.0,"b2":1.0,"ell":1}},
               "parameters":{{"t_final":0.5,"dt":0.05,"initial":{{"kind":"smooth_random","width":2.0,"norm":1.0}}}}}}"#,
            dir.to_string_lossy()
        );
        let out = run(&ExperimentConfig::from_json_str(&text).unwrap()).unwrap();
        assert!(out.summary["results"]["charge_drift_relative"].as_f64().unwrap() <= 1e-12);
        assert!(dir.join("final.dhc").exists());
        let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn validation_error_json_lists_issues() {
        let e = ExperimentConfig::from_json_str(r#"{"kind":"nope"}"#).unwrap_err();
        let v = error_json(&e);
        assert_eq!(v["error"]["kind"], "validation");
        let keys: Vec<&str> = v["error"]["issues"].as_array().unwrap().iter().map(|i| i["key"].as_str().unwrap()).collect();
        assert_eq!(keys, ["kind", "seed", "output_dir"]);
    }
}
