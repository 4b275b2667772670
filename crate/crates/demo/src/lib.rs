//! WebAssembly bindings for the static page in `www/`.
//!
//! Every export returns a JSON string; failures come back as
//! `{"error": {...}}` so the page has a single code path.

use num_complex::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use dirac_core::evolution::{evolve, split_initial_data};
use dirac_core::harness::error_json;
use dirac_core::spectral_core::{
    apply_multiplier, dirac_operator, dirac_projection, DiracParams, Grid2D, MultiplierSpec, NonlinearitySelector, Sign, SpinorField,
};
use dirac_core::xsb_probe::{random_phase_packet, trial_rng, weighted_l4_ascent, Ball, ConePacketSpec};
use dirac_core::Result;

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => error_json(&e).to_string(),
    }
}

fn selector(ell: u8) -> Result<NonlinearitySelector> {
    match ell {
        1 => Ok(NonlinearitySelector::Power),
        2 => Ok(NonlinearitySelector::Hartree),
        _ => Err(dirac_core::Error::invalid("ell", format!("expected 1 or 2, got {ell}"))),
    }
}

/// Evolve smooth random data on the 2π torus; returns the charge and H¹
/// history plus the final density |ψ|² (row-major, n×n).
#[wasm_bindgen]
pub fn simulate(n: usize, kappa: f64, ell: u8, t_final: f64, steps: usize, seed: u64) -> String {
    respond((|| {
        let grid = Grid2D::new(n, std::f64::consts::TAU)?;
        let p = DiracParams::default().with_kappa(kappa).with_ell(selector(ell)?);
        p.validate()?;
        let steps = steps.max(1);
        let psi0 = SpinorField::smooth_random(grid, seed, 3.0, 4.0);
        let every = (steps / 50).max(1);
        let (end, rows) = evolve(&split_initial_data(&psi0, &p), t_final / steps as f64, steps, &p, &[1.0], every)?;
        let psi = end.psi().in_physical();
        let density: Vec<f64> = (0..grid.len()).map(|i| psi.component(0)[i].norm_sqr() + psi.component(1)[i].norm_sqr()).collect();
        Ok(json!({
            "times": rows.iter().map(|r| r.time).collect::<Vec<_>>(),
            "charge": rows.iter().map(|r| r.charge).collect::<Vec<_>>(),
            "h1": rows.iter().map(|r| r.hs[0]).collect::<Vec<_>>(),
            "n": n,
            "density": density,
        }))
    })())
}

/// Relative errors of Π^±Π^± = Π^±, Π^±Π^∓ = 0, Π^+ + Π^− = I and
/// α·D = |λ♯||∇|(Π^+ − Π^−) on a mean-zero random field.
#[wasm_bindgen]
pub fn projection_errors(n: usize, lam_re: f64, lam_im: f64, seed: u64) -> String {
    respond((|| {
        let grid = Grid2D::new(n, std::f64::consts::TAU)?;
        let lam = Complex64::new(lam_re, lam_im);
        let p = DiracParams::default().with_lambda_sharp(lam);
        p.validate()?;
        let mut f = SpinorField::random_band_limited(grid, seed, (n / 3) as i64, |_| 1.0);
        for comp in f.components_mut().iter_mut() {
            comp[0] = Complex64::new(0.0, 0.0);
        }
        let norm = f.l2_norm();
        let pp = dirac_projection(&f, Sign::Plus, &p);
        let pm = dirac_projection(&f, Sign::Minus, &p);
        let idem = dirac_projection(&pp, Sign::Plus, &p).sub(&pp)?.l2_norm() / norm;
        let orth = dirac_projection(&pp, Sign::Minus, &p).l2_norm() / norm;
        let complete = pp.add(&pm)?.sub(&f)?.l2_norm() / norm;
        let lhs = dirac_operator(&f, &p);
        let rhs = apply_multiplier(&pp.sub(&pm)?, &MultiplierSpec::abs_grad(grid))?.scaled(Complex64::new(lam.norm(), 0.0));
        let dirac = lhs.sub(&rhs)?.l2_norm() / lhs.l2_norm();
        Ok(json!({ "idempotent": idem, "orthogonal": orth, "complete": complete, "alpha_dot_d": dirac }))
    })())
}

/// Best L⁴/L² ratio over `trials` ascents from random-phase cone packets at
/// scale λ, thickness L, localized to the ball B((λ, 0), μ).
#[wasm_bindgen]
pub fn cone_l4_ratio(lam: f64, l: f64, mu: f64, trials: usize, seed: u64) -> String {
    respond((|| {
        let n = 32;
        let dk = mu / (n / 2 - 2) as f64;
        let strip = (2.0 * (2.0 * lam * l).sqrt()).min((n / 2 - 1) as f64 * dk);
        let spec = ConePacketSpec { lam, l, ball: Some(Ball { center: [lam, 0.0], radius: mu }), sign: Sign::Plus, seed, strip_half_width: Some(strip) };
        let lat = spec.fitted_lattice(n, n, dk)?;
        let (frame, mask) = spec.support(&lat)?;
        let w = vec![1.0; lat.len()];
        let mut best = 0.0f64;
        for t in 0..trials.max(1) {
            let u0 = random_phase_packet(lat, frame, &mask, &mut trial_rng(seed, t as u64))?;
            best = best.max(weighted_l4_ascent(&u0, &mask, &w, 8).0);
        }
        Ok(json!({ "ratio": best, "modes": mask.iter().filter(|m| **m).count() }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn exports_return_json() {
        let v = parse(projection_errors(16, 2.0, 1.0, 3));
        for k in ["idempotent", "orthogonal", "complete", "alpha_dot_d"] {
            assert!(v[k].as_f64().unwrap() < 1e-12, "{k}: {v}");
        }
        let v = parse(simulate(16, 1.0, 1, 0.1, 10, 1));
        assert_eq!(v["density"].as_array().unwrap().len(), 256);
        let v = parse(cone_l4_ratio(64.0, 1.0, 16.0, 1, 0));
        assert!(v["ratio"].as_f64().unwrap() > 0.0, "{v}");
    }

    #[test]
    fn errors_are_json_too() {
        let v = parse(simulate(12, 1.0, 3, 0.1, 10, 1));
        assert!(v["error"]["kind"].is_string());
    }
}
