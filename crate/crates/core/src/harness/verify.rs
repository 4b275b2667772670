//! Self-verification suite behind the `verify` command.
//!
//! Checks are grouped; a group whose prerequisite failed is reported as
//! skipped, so a broken layer is pinpointed instead of cascading.

use num_complex::Complex64;
use serde::Serialize;
use std::time::Instant;

use crate::error::Result;
use crate::evolution::{evolve, evolve_to, picard_iterate, rhs, scaling_covariance_check, scaling_transform, split_initial_data, PicardConfig};
use crate::illposedness_probe::{box_data, compare_proportional, flow_third_derivative_oracle, trilinear_term, IllposednessConfig};
use crate::nonlinearity::interaction_energy;
use crate::spectral_core::{
    apply_multiplier, dirac_operator, dirac_projection, half_wave_propagate, sobolev_norm, DiracParams, Grid2D, MultiplierSpec, NonlinearitySelector, Sign, SpinorField,
};
use crate::xsb_probe::{l4_cone_experiment, trial_rng, xsb_norm, L4ConeConfig, SpacetimeField, SpacetimeLattice, SpectralFrame, XsbParams};

/// Deliberate defects used to check that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign inside Π^−.
    ProjectionSign,
}

impl std::str::FromStr for Fault {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "projection-sign" => Ok(Fault::ProjectionSign),
            other => Err(format!("unknown fault `{other}`; known faults: projection-sign")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance condition, e.g. "<= 1e-12".
    pub condition: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum GroupStatus {
    Passed,
    Failed,
    Skipped(String),
    Error(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupResult {
    pub name: &'static str,
    pub status: GroupStatus,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub groups: Vec<GroupResult>,
    pub seconds: f64,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.status == GroupStatus::Passed)
    }

    pub fn group(&self, name: &str) -> Option<&GroupResult> {
        self.groups.iter().find(|g| g.name == name)
    }

    /// One line per check plus one per group.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in &self.groups {
            match &g.status {
                GroupStatus::Skipped(why) => out.push(format!("[{}] skipped ({why})", g.name)),
                GroupStatus::Error(e) => out.push(format!("[{}] ERROR {e}", g.name)),
                s => {
                    for c in &g.checks {
                        out.push(format!("[{}] {} {}: {:.3e} (want {})", g.name, if c.passed { "PASS" } else { "FAIL" }, c.name, c.measured, c.condition));
                    }
                    out.push(format!("[{}] {} in {:.2} s", g.name, if *s == GroupStatus::Passed { "passed" } else { "FAILED" }, g.seconds));
                }
            }
        }
        out.push(format!("verify: {} in {:.1} s", if self.passed() { "all groups passed" } else { "FAILURES" }, self.seconds));
        out
    }
}

struct Ctx {
    params: DiracParams,
}

impl Ctx {
    fn params(&self) -> DiracParams {
        self.params
    }
}

fn at_most(name: impl Into<String>, v: f64, tol: f64) -> CheckResult {
    CheckResult { name: name.into(), measured: v, condition: format!("<= {tol:e}"), passed: v <= tol }
}

fn within(name: impl Into<String>, v: f64, lo: f64, hi: f64) -> CheckResult {
    CheckResult { name: name.into(), measured: v, condition: format!("in [{lo:.4}, {hi:.4}]"), passed: (lo..=hi).contains(&v) }
}

fn rel(a: &SpinorField, b: &SpinorField) -> Result<f64> {
    let d = a.sub(b)?.l2_norm();
    let s = b.l2_norm().max(a.l2_norm());
    Ok(if s == 0.0 { d } else { d / s })
}

/// Mean-zero random field; Π^±(0) = ½I is not a projection, so the zero
/// mode is left out of the algebra checks.
fn random(g: Grid2D, seed: u64) -> SpinorField {
    let mut f = SpinorField::random_band_limited(g, seed, (g.n() / 3) as i64, |_| 1.0);
    for comp in f.components_mut().iter_mut() {
        comp[0] = c(0.0, 0.0);
    }
    f
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type GroupFn = fn(&Ctx) -> Result<Vec<CheckResult>>;

const GROUPS: [(&str, &[&str], GroupFn); 10] = [
    ("grid-fft", &[], grid_fft),
    ("projection-algebra", &[], projection_algebra),
    ("propagator", &["grid-fft"], propagator),
    ("nonlinearity", &["projection-algebra"], nonlinearity),
    ("conservation", &["projection-algebra", "propagator", "nonlinearity"], conservation),
    ("convergence", &["conservation"], convergence),
    ("scaling", &["propagator", "nonlinearity"], scaling),
    ("picard", &["projection-algebra", "propagator", "nonlinearity"], picard),
    ("xsb", &["grid-fft"], xsb),
    ("illposed", &["projection-algebra", "propagator", "nonlinearity"], illposed),
];

pub fn group_names() -> Vec<&'static str> {
    GROUPS.iter().map(|g| g.0).collect()
}

/// Run the suite; `progress` sees each group as it finishes.
pub fn verify_suite(opts: &VerifyOptions, mut progress: impl FnMut(&GroupResult)) -> VerifySummary {
    let start = Instant::now();
    let mut params = DiracParams::default();
    if opts.inject_fault == Some(Fault::ProjectionSign) {
        params = params.with_injected_sign_fault();
    }
    let ctx = Ctx { params };
    let mut groups: Vec<GroupResult> = Vec::new();
    for (name, deps, f) in GROUPS {
        let t0 = Instant::now();
        let broken: Vec<&str> = deps.iter().copied().filter(|d| groups.iter().any(|g| g.name == *d && g.status != GroupStatus::Passed)).collect();
        let (status, checks) = if !broken.is_empty() {
            (GroupStatus::Skipped(format!("depends on {}", broken.join(", "))), Vec::new())
        } else {
            match f(&ctx) {
                Ok(checks) => (if checks.iter().all(|c| c.passed) { GroupStatus::Passed } else { GroupStatus::Failed }, checks),
                Err(e) => (GroupStatus::Error(e.to_string()), Vec::new()),
            }
        };
        let g = GroupResult { name, status, checks, seconds: t0.elapsed().as_secs_f64() };
        progress(&g);
        groups.push(g);
    }
    VerifySummary { groups, seconds: start.elapsed().as_secs_f64() }
}

fn grid_fft(_: &Ctx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for n in [16, 32] {
        let g = Grid2D::new(n, 5.0)?;
        let f = random(g, 1).in_physical();
        let back = f.in_frequency().in_physical();
        out.push(at_most(format!("transform round trip n={n}"), rel(&back, &f)?, 1e-12));
        let pf = f.l2_norm();
        let ff = f.in_frequency().l2_norm();
        out.push(at_most(format!("Parseval n={n}"), (pf - ff).abs() / pf, 1e-12));
        let k = [3i64, -2];
        let pw = SpinorField::plane_wave(g, k, [c(1.0, 0.0), c(0.0, 0.0)]).in_frequency();
        let idx = g.index(g.storage_index(k[0]).unwrap(), g.storage_index(k[1]).unwrap());
        let total: f64 = pw.component(0).iter().chain(pw.component(1)).map(|z| z.norm_sqr()).sum();
        let leak = (total - pw.component(0)[idx].norm_sqr()).max(0.0).sqrt() / total.sqrt();
        out.push(at_most(format!("plane wave is a single mode n={n}"), leak, 1e-12));
    }
    Ok(out)
}

fn projection_algebra(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for n in [16, 32] {
        for lam in [c(1.0, 0.0), c(2.0, 1.0)] {
            let p = ctx.params().with_lambda_sharp(lam);
            let g = Grid2D::new(n, 7.0)?;
            let f = random(g, 2);
            let tag = format!("n={n} lambda={lam}");
            let pp = dirac_projection(&f, Sign::Plus, &p);
            let pm = dirac_projection(&f, Sign::Minus, &p);
            let idem = rel(&dirac_projection(&pp, Sign::Plus, &p), &pp)?.max(rel(&dirac_projection(&pm, Sign::Minus, &p), &pm)?);
            out.push(at_most(format!("idempotent {tag}"), idem, 1e-12));
            let orth = dirac_projection(&pp, Sign::Minus, &p).l2_norm().max(dirac_projection(&pm, Sign::Plus, &p).l2_norm()) / f.l2_norm();
            out.push(at_most(format!("orthogonal {tag}"), orth, 1e-12));
            out.push(at_most(format!("complete {tag}"), rel(&pp.add(&pm)?, &f)?, 1e-12));
            let lhs = dirac_operator(&f, &p);
            let grad = apply_multiplier(&pp.sub(&pm)?, &MultiplierSpec::abs_grad(g))?.scaled(c(lam.norm(), 0.0));
            out.push(at_most(format!("alpha.D = |lambda||grad|(P+ - P-) {tag}"), rel(&grad, &lhs)?, 1e-12));
        }
    }
    Ok(out)
}

fn propagator(_: &Ctx) -> Result<Vec<CheckResult>> {
    let g = Grid2D::new(32, 6.0)?;
    let f = random(g, 3);
    let mut out = Vec::new();
    for sign in Sign::BOTH {
        let (t, s) = (0.7, -1.9);
        let a = half_wave_propagate(&f, t, sign)?;
        out.push(at_most(format!("isometry {}", sign.symbol()), (a.l2_norm() - f.l2_norm()).abs() / f.l2_norm(), 1e-12));
        out.push(at_most(format!("reversible {}", sign.symbol()), rel(&half_wave_propagate(&a, -t, sign)?, &f)?, 1e-12));
        let ab = half_wave_propagate(&a, s, sign)?;
        out.push(at_most(format!("group law {}", sign.symbol()), rel(&ab, &half_wave_propagate(&f, t + s, sign)?)?, 1e-12));
    }
    let pw = SpinorField::plane_wave(g, [3, 4], [c(1.0, 0.0), c(0.0, 0.0)]);
    let t = 0.3;
    let want = pw.scaled(Complex64::from_polar(1.0, -5.0 * g.dk() * t));
    out.push(at_most("plane wave phase", rel(&half_wave_propagate(&pw, t, Sign::Plus)?, &want)?, 1e-12));
    Ok(out)
}

fn smooth(g: Grid2D, seed: u64, norm: f64) -> SpinorField {
    SpinorField::smooth_random(g, seed, 2.0, norm)
}

fn nonlinearity(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let g = Grid2D::new(32, 4.0)?;
    let mut out = Vec::new();
    for ell in [NonlinearitySelector::Power, NonlinearitySelector::Hartree] {
        let p = ctx.params().with_kappa(2.0).with_ell(ell).with_lambda_sharp(c(2.0, 1.0));
        let psi = smooth(g, 5, 1.0);
        let e = interaction_energy(&psi, &p)?;
        out.push(at_most(format!("interaction energy is real, l={}", ell.ell()), e.im.abs() / e.norm(), 1e-12));
        let s = split_initial_data(&psi, &p);
        let (dp, dm) = rhs(&s, &p)?;
        let flux = s.psi().inner(&dp.add(&dm)?)?.re;
        out.push(at_most(format!("no charge flux, l={}", ell.ell()), flux.abs() / s.charge(), 1e-10));
    }
    Ok(out)
}

fn conservation(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let g = Grid2D::new(32, 2.0 * std::f64::consts::PI)?;
    let mut out = Vec::new();
    for (kappa, tol) in [(1.0, 1e-8), (0.0, 1e-12)] {
        for ell in [NonlinearitySelector::Power, NonlinearitySelector::Hartree] {
            let p = ctx.params().with_kappa(kappa).with_ell(ell);
            let s0 = split_initial_data(&smooth(g, 7, 1.0), &p);
            let (_, rows) = evolve(&s0, 0.01, 50, &p, &[], 10)?;
            let q0 = rows[0].charge;
            let drift = rows.iter().map(|r| (r.charge - q0).abs()).fold(0.0, f64::max) / q0;
            out.push(at_most(format!("charge drift kappa={kappa} l={}", ell.ell()), drift, tol));
        }
    }
    Ok(out)
}

fn convergence(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let g = Grid2D::new(32, 2.0 * std::f64::consts::PI)?;
    let mut out = Vec::new();
    for ell in [NonlinearitySelector::Power, NonlinearitySelector::Hartree] {
        let p = ctx.params().with_ell(ell);
        let s0 = split_initial_data(&smooth(g, 8, 2.0), &p);
        let order = crate::evolution::strang_self_convergence_order(&s0, 0.4, 0.04, &p)?;
        out.push(within(format!("Strang order l={}", ell.ell()), order, 1.9, 2.1));
    }
    Ok(out)
}

fn scaling(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let g = Grid2D::new(32, 8.0)?;
    let f = smooth(g, 9, 1.0);
    let mut out = Vec::new();
    let mut worst_half = 0.0f64;
    let mut worst_l2 = 0.0f64;
    for lam in [0.5, 2.0, 3.3] {
        let h = scaling_transform(&f, lam, NonlinearitySelector::Power)?;
        let (a, b) = (sobolev_norm(&f, 0.5, true)?, sobolev_norm(&h, 0.5, true)?);
        worst_half = worst_half.max((a - b).abs() / a);
        let h2 = scaling_transform(&f, lam, NonlinearitySelector::Hartree)?;
        worst_l2 = worst_l2.max((h2.l2_norm() - f.l2_norm()).abs() / f.l2_norm());
    }
    out.push(at_most("homogeneous H^1/2 invariance, l=1", worst_half, 1e-10));
    out.push(at_most("L2 invariance, l=2", worst_l2, 1e-10));
    for ell in [NonlinearitySelector::Power, NonlinearitySelector::Hartree] {
        let p = ctx.params().with_ell(ell);
        let cc = scaling_covariance_check(&f, 2.0, 0.2, 0.02, &p)?;
        out.push(CheckResult {
            name: format!("flow covariance l={}", ell.ell()),
            measured: cc.discrepancy,
            condition: format!("<= discretization error {:.3e}", cc.discretization_error),
            passed: cc.discrepancy <= cc.discretization_error,
        });
    }
    Ok(out)
}

fn picard(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let g = Grid2D::new(16, 2.0 * std::f64::consts::PI)?;
    let p = ctx.params().with_kappa(1e6);
    let mut psi0 = SpinorField::smooth_random(g, 5, 2.0, 1.0);
    let norm = sobolev_norm(&psi0, 1.0, false)?;
    psi0.scale(c(1e-2 / norm, 0.0));
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let mut dts = Vec::new();
    for q in [17usize, 33] {
        let cfg = PicardConfig { t_final: 0.1, n_iter: 8, quadrature_points: q, delta: 1e-2, s: 1.0 };
        let r = picard_iterate(&psi0, &cfg, &p)?;
        let worst = r.ratios().into_iter().take(6).fold(0.0, f64::max);
        out.push(at_most(format!("residual ratio, Q={q}"), worst, 1.0 - 1e-12));
        let h = cfg.t_final / (q - 1) as f64;
        let strang = evolve_to(&split_initial_data(&psi0, &p), cfg.t_final, h, &p)?.psi();
        errs.push(r.final_state().psi().sub(&strang)?.l2_norm());
        dts.push(h);
    }
    let slope = (errs[0] / errs[1]).ln() / (dts[0] / dts[1]).ln();
    out.push(within("Picard vs Strang order", slope, 1.7, 2.3));
    Ok(out)
}

fn xsb(_: &Ctx) -> Result<Vec<CheckResult>> {
    use rand::Rng;
    let mut out = Vec::new();
    let lat = SpacetimeLattice::with_spacings(8, 8, 1.5, 0.7)?;
    let frame = SpectralFrame { tau_offset: 0.3, xi_offset: [4.0, -1.0], shear: [0.6, 0.8] };
    let mut rng = trial_rng(11, 0);
    let coeffs: Vec<Complex64> = (0..lat.len()).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let u = SpacetimeField { lattice: lat, frame, coeffs };
    let x00 = xsb_norm(&u, &XsbParams::new(0.0, 0.0, Sign::Plus));
    out.push(at_most("X^{0,0} = L2", (x00 - u.l2_norm()).abs() / u.l2_norm(), 1e-12));
    let r = u.reflected();
    let mut worst = 0.0f64;
    for (s, b) in [(0.5, 0.55), (0.875, 0.3), (-0.2, 1.0)] {
        let a = xsb_norm(&u, &XsbParams::new(s, b, Sign::Plus));
        let bb = xsb_norm(&r, &XsbParams::new(s, b, Sign::Minus));
        worst = worst.max((a - bb).abs() / a);
    }
    out.push(at_most("reflection swaps the cone sign", worst, 1e-12));
    let mut one = SpacetimeField::zeros(lat, frame);
    one.coeffs[37] = c(0.0, 2.0);
    let want = lat.volume().powf(-0.25);
    out.push(at_most("single mode L4/L2", (one.l4_norm() / one.l2_norm() - want).abs() / want, 1e-12));
    let cfg = L4ConeConfig { n: 32, nt: 32, dk: 8.0, trials: 2, ..Default::default() };
    let rep = l4_cone_experiment(&cfg)?;
    for sw in &rep.sweeps {
        let t = sw.target_slope.unwrap_or(f64::NAN);
        out.push(within(format!("L4 cone slope vs {} (n=32)", sw.param_name), sw.fit.slope, t - 0.1, t + 0.1));
    }
    Ok(out)
}

fn illposed(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let cfg = IllposednessConfig { cells_per_half_width: 2, n: Some(32), params: ctx.params(), lambdas: vec![8.0], ..Default::default() };
    let lam = 8.0;
    let g = cfg.grid_for(lam)?;
    let phi = box_data(lam, cfg.mu(lam), &g)?;
    let t = cfg.time(lam);
    let l = trilinear_term(&phi, t, &cfg)?;
    let z = c(0.0, 2.0);
    let lz = trilinear_term(&phi.scaled(z), t, &cfg)?;
    out.push(at_most("trilinear homogeneity", rel(&lz, &l.scaled(z * z.norm_sqr()))?, 1e-12));
    let oracle = flow_third_derivative_oracle(&phi, t, &cfg, &[0.25, 0.5, 0.75, 1.0], 8)?;
    let prop = compare_proportional(&l, &oracle.cubic)?;
    out.push(CheckResult { name: "oracle direction cosine (n=32, lambda=8)".into(), measured: prop.cosine, condition: ">= 0.99".into(), passed: prop.cosine >= 0.99 });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_is_pinpointed_to_projection_algebra() {
        let ctx = Ctx { params: DiracParams::default().with_injected_sign_fault() };
        assert!(projection_algebra(&ctx).unwrap().iter().any(|c| !c.passed));
        assert!(grid_fft(&ctx).unwrap().iter().all(|c| c.passed));
    }

    #[test]
    fn fault_names_parse() {
        assert_eq!("projection-sign".parse::<Fault>(), Ok(Fault::ProjectionSign));
        assert!("other".parse::<Fault>().is_err());
    }
}
