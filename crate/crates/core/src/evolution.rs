//! Time evolution of the split system ψ = ψ₊ + ψ₋ and the Picard/Duhamel
//! iterator.
//!
//! The semi-discrete system is
//! `∂ₜψ± = ∓i|∇|ψ± + γ Π±[d(ψ) ⊙ ψ]`, where `d(ψ)` is the diagonal of
//! N_ℓ(ψ, ψ) built from the 2/3-filtered field and filtered again.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::self_coefficients;
use crate::par;
use crate::spectral_core::dirac::half_wave_in_place;
use crate::spectral_core::field::{Representation, SpinorField};
use crate::spectral_core::grid::Grid2D;
use crate::spectral_core::{dirac_projection, sobolev_norm, DiracParams, NonlinearitySelector, Sign};

/// Half-wave components with a time stamp. Both parts are kept in the
/// frequency representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub psi_plus: SpinorField,
    pub psi_minus: SpinorField,
    pub time: f64,
}

impl SplitState {
    /// ψ = ψ₊ + ψ₋ (frequency representation).
    pub fn psi(&self) -> SpinorField {
        self.psi_plus.add(&self.psi_minus).expect("parts share a grid")
    }

    pub fn grid(&self) -> &Grid2D {
        self.psi_plus.grid()
    }

    /// ‖ψ‖²_{L²}.
    pub fn charge(&self) -> f64 {
        self.psi().l2_norm().powi(2)
    }

    pub fn part(&self, sign: Sign) -> &SpinorField {
        match sign {
            Sign::Plus => &self.psi_plus,
            Sign::Minus => &self.psi_minus,
        }
    }

    fn from_psi(psi: &SpinorField, time: f64, p: &DiracParams) -> Self {
        let psi = psi.in_frequency();
        Self {
            psi_plus: dirac_projection(&psi, Sign::Plus, p),
            psi_minus: dirac_projection(&psi, Sign::Minus, p),
            time,
        }
    }
}

/// ψ₀,± = Π±ψ₀.
pub fn split_initial_data(psi0: &SpinorField, p: &DiracParams) -> SplitState {
    SplitState::from_psi(psi0, 0.0, p)
}

/// d(ψ) ⊙ ψ in physical space for a physical-space ψ.
fn coupling_product(psi_phys: &SpinorField, p: &DiracParams) -> SpinorField {
    let d = self_coefficients(psi_phys, p);
    let mut out = psi_phys.clone();
    for k in 0..2 {
        for (z, w) in out.component_mut(k).iter_mut().zip(&d[k]) {
            *z *= w;
        }
    }
    out
}

/// γ·d(ψ) ⊙ ψ in the frequency representation.
fn forcing(psi: &SpinorField, p: &DiracParams) -> SpinorField {
    let mut f = coupling_product(&psi.in_physical(), p);
    f.scale(p.gamma());
    f.to_frequency();
    f
}

/// (∂ₜψ₊, ∂ₜψ₋) at the given state.
pub fn rhs(state: &SplitState, p: &DiracParams) -> Result<(SpinorField, SpinorField)> {
    p.validate()?;
    let psi = state.psi();
    let f = forcing(&psi, p);
    let grid = *state.grid();
    let mut out = Vec::with_capacity(2);
    for sign in Sign::BOTH {
        let mut d = dirac_projection(&f, sign, p);
        let part = state.part(sign).in_frequency();
        let s = sign.value();
        for k in 0..2 {
            let src = part.component(k);
            for (idx, z) in d.component_mut(k).iter_mut().enumerate() {
                *z += Complex64::new(0.0, -s * grid.abs_xi(idx)) * src[idx];
            }
        }
        out.push(d);
    }
    let m = out.pop().unwrap();
    Ok((out.pop().unwrap(), m))
}

fn free_half_flow(state: &mut SplitState, t: f64) {
    state.psi_plus.to_frequency();
    state.psi_minus.to_frequency();
    half_wave_in_place(&mut state.psi_plus, t, Sign::Plus);
    half_wave_in_place(&mut state.psi_minus, t, Sign::Minus);
}

/// Pointwise exp(γ·h·d) ⊙ ψ.
fn exp_coupling(psi_phys: &SpinorField, d: &[Vec<Complex64>; 2], h: f64, p: &DiracParams) -> SpinorField {
    let g = p.gamma() * h;
    let mut out = psi_phys.clone();
    for k in 0..2 {
        for (z, w) in out.component_mut(k).iter_mut().zip(&d[k]) {
            *z *= (g * w).exp();
        }
    }
    out
}

/// Strang stepper with a fixed step; caches the half-step free-flow phases.
#[derive(Debug, Clone)]
pub struct StrangStepper {
    params: DiracParams,
    dt: f64,
    half_phase: Vec<Complex64>,
}

impl StrangStepper {
    pub fn new(grid: &Grid2D, dt: f64, p: &DiracParams) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("dt", format!("need a finite positive step, got {dt}")));
        }
        p.validate()?;
        let half_phase = (0..grid.len()).map(|i| Complex64::from_polar(1.0, -0.5 * dt * grid.abs_xi(i))).collect();
        Ok(Self { params: *p, dt, half_phase })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn half_flow(&self, s: &mut SplitState) {
        s.psi_plus.to_frequency();
        s.psi_minus.to_frequency();
        for k in 0..2 {
            for (z, ph) in s.psi_plus.component_mut(k).iter_mut().zip(&self.half_phase) {
                *z *= ph;
            }
            for (z, ph) in s.psi_minus.component_mut(k).iter_mut().zip(&self.half_phase) {
                *z *= ph.conj();
            }
        }
    }

    /// Exact half free flow, a frozen-coefficient midpoint step of the
    /// coupling, exact half free flow.
    pub fn step(&self, state: &SplitState) -> Result<SplitState> {
        if state.grid().len() != self.half_phase.len() {
            return Err(Error::GridMismatch("stepper built for another grid".into()));
        }
        let (p, dt) = (&self.params, self.dt);
        let mut s = state.clone();
        self.half_flow(&mut s);
        if p.kappa != 0.0 {
            let psi_f = s.psi();
            let psi = psi_f.in_physical();
            let half = exp_coupling(&psi, &self_coefficients(&psi_f, p), 0.5 * dt, p);
            let full = exp_coupling(&psi, &self_coefficients(&half, p), dt, p);
            s = SplitState::from_psi(&full, s.time, p);
        }
        self.half_flow(&mut s);
        s.time = state.time + dt;
        if !(s.psi_plus.is_finite() && s.psi_minus.is_finite()) {
            return Err(Error::NonFinite(format!("state blew up during the step from t = {} with dt = {dt}", state.time)));
        }
        Ok(s)
    }
}

/// One Strang step of size `dt`.
pub fn step_strang(state: &SplitState, dt: f64, p: &DiracParams) -> Result<SplitState> {
    StrangStepper::new(state.grid(), dt, p)?.step(state)
}

/// One diagnostics row of an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub step: usize,
    pub time: f64,
    pub charge: f64,
    pub hs: Vec<f64>,
}

fn record(state: &SplitState, step: usize, s_list: &[f64]) -> Result<EvolutionRecord> {
    let psi = state.psi();
    let hs = s_list.iter().map(|&s| sobolev_norm(&psi, s, false)).collect::<Result<Vec<_>>>()?;
    Ok(EvolutionRecord { step, time: state.time, charge: psi.l2_norm().powi(2), hs })
}

/// Take `steps` Strang steps of size `dt`, recording diagnostics every
/// `every` steps (and at the end).
pub fn evolve(state: &SplitState, dt: f64, steps: usize, p: &DiracParams, s_list: &[f64], every: usize) -> Result<(SplitState, Vec<EvolutionRecord>)> {
    p.validate()?;
    let every = every.max(1);
    let mut s = state.clone();
    let mut rows = vec![record(&s, 0, s_list)?];
    let stepper = StrangStepper::new(state.grid(), dt, p)?;
    for k in 1..=steps {
        s = stepper.step(&s)?;
        if k % every == 0 || k == steps {
            rows.push(record(&s, k, s_list)?);
        }
    }
    Ok((s, rows))
}

/// Evolve to time `t` with a step no larger than `dt_max`.
pub fn evolve_to(state: &SplitState, t: f64, dt_max: f64, p: &DiracParams) -> Result<SplitState> {
    if t == 0.0 {
        return Ok(state.clone());
    }
    let steps = (t / dt_max).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let stepper = StrangStepper::new(state.grid(), dt, p)?;
    let mut s = state.clone();
    for _ in 0..steps {
        s = stepper.step(&s)?;
    }
    Ok(s)
}

pub fn write_diagnostics_csv<W: std::io::Write>(rows: &[EvolutionRecord], s_list: &[f64], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["step".to_string(), "time".into(), "charge".into()];
    header.extend(s_list.iter().map(|s| format!("Hs_{s}")));
    wr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.step.to_string(), format!("{:.17e}", r.time), format!("{:.17e}", r.charge)];
        rec.extend(r.hs.iter().map(|v| format!("{v:.17e}")));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Measured temporal order from a Richardson triplet dt, dt/2, dt/4.
pub fn strang_self_convergence_order(state: &SplitState, t: f64, dt: f64, p: &DiracParams) -> Result<f64> {
    let u: Vec<SpinorField> = par::map_range(3, |k| evolve_to(state, t, dt / (1 << k) as f64, p).map(|s| s.psi()))
        .into_iter()
        .collect::<Result<_>>()?;
    let e1 = u[0].sub(&u[1])?.l2_norm();
    let e2 = u[1].sub(&u[2])?.l2_norm();
    Ok((e1 / e2).log2())
}

/// Settings of the Picard iteration on [0, T].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    /// Horizon T.
    pub t_final: f64,
    /// Maximum number of iterations.
    pub n_iter: usize,
    /// Number of time samples (including both endpoints) of the trapezoid rule.
    pub quadrature_points: usize,
    /// Smallness radius δ; reported alongside the residuals.
    pub delta: f64,
    /// Sobolev index of the residual norm.
    #[serde(default = "default_picard_s")]
    pub s: f64,
}

fn default_picard_s() -> f64 {
    1.0
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::invalid("t_final", "must be positive"));
        }
        if self.n_iter < 1 {
            return Err(Error::invalid("n_iter", "must be at least 1"));
        }
        if self.quadrature_points < 2 {
            return Err(Error::invalid("quadrature_points", "need at least 2 samples"));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid("delta", "must be positive"));
        }
        if !self.s.is_finite() {
            return Err(Error::invalid("s", "must be finite"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let q = self.quadrature_points - 1;
        (0..=q).map(|m| self.t_final * m as f64 / q as f64).collect()
    }
}

/// Output of [`picard_iterate`].
#[derive(Debug, Clone)]
pub struct PicardResult {
    pub times: Vec<f64>,
    /// `iterates[k][m]` is the k-th iterate at `times[m]`; `iterates[0]` is
    /// the free evolution.
    pub iterates: Vec<Vec<SplitState>>,
    /// r_k = max over the time grid of ‖ψ⁽ᵏ⁺¹⁾ − ψ⁽ᵏ⁾‖_{H^s}.
    pub residuals: Vec<f64>,
    /// Set when the residual grew three times in a row.
    pub diverged: bool,
}

impl PicardResult {
    pub fn ratios(&self) -> Vec<f64> {
        self.residuals.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn final_state(&self) -> &SplitState {
        self.iterates.last().unwrap().last().unwrap()
    }
}

fn free_trajectory(s0: &SplitState, times: &[f64]) -> Vec<SplitState> {
    par::map_range(times.len(), |m| {
        let mut s = s0.clone();
        free_half_flow(&mut s, times[m]);
        s.time = times[m];
        s
    })
}

/// Picard iteration of the Duhamel map
/// `ψ±(t) = S±(t)ψ₀,± + γ∫₀ᵗ S±(t−t′)Π±[N(ψ)ψ](t′)dt′`
/// with the composite trapezoid rule on the output time grid, starting from
/// the free solution.
pub fn picard_iterate(psi0: &SpinorField, cfg: &PicardConfig, p: &DiracParams) -> Result<PicardResult> {
    cfg.validate()?;
    p.validate()?;
    let times = cfg.times();
    let h = times[1] - times[0];
    let s0 = split_initial_data(psi0, p);
    let mut iterates = vec![free_trajectory(&s0, &times)];
    let mut residuals = Vec::new();
    let mut diverged = false;
    let mut growth = 0;
    for _ in 0..cfg.n_iter {
        let prev = iterates.last().unwrap();
        // G±(t_j) = S±(−t_j)Π±F(t_j)
        let g: Vec<(SpinorField, SpinorField)> = par::map_range(times.len(), |j| {
            let f = forcing(&prev[j].psi(), p);
            let mut gp = dirac_projection(&f, Sign::Plus, p);
            let mut gm = dirac_projection(&f, Sign::Minus, p);
            half_wave_in_place(&mut gp, -times[j], Sign::Plus);
            half_wave_in_place(&mut gm, -times[j], Sign::Minus);
            (gp, gm)
        });
        let half = Complex64::new(0.5 * h, 0.0);
        let mut acc = SplitState { psi_plus: s0.psi_plus.clone(), psi_minus: s0.psi_minus.clone(), time: 0.0 };
        let mut next = Vec::with_capacity(times.len());
        for m in 0..times.len() {
            if m > 0 {
                acc.psi_plus.axpy(half, &g[m - 1].0)?;
                acc.psi_plus.axpy(half, &g[m].0)?;
                acc.psi_minus.axpy(half, &g[m - 1].1)?;
                acc.psi_minus.axpy(half, &g[m].1)?;
            }
            let mut s = acc.clone();
            free_half_flow(&mut s, times[m]);
            s.time = times[m];
            next.push(s);
        }
        let diffs: Vec<Result<f64>> = par::map_range(times.len(), |m| sobolev_norm(&next[m].psi().sub(&prev[m].psi())?, cfg.s, false));
        let mut r = 0.0f64;
        for d in diffs {
            r = r.max(d?);
        }
        if !r.is_finite() {
            return Err(Error::NonFinite("Picard residual".into()));
        }
        if let Some(&last) = residuals.last() {
            if r > last {
                growth += 1;
                if growth >= 3 {
                    diverged = true;
                }
            } else {
                growth = 0;
            }
        }
        residuals.push(r);
        iterates.push(next);
    }
    Ok(PicardResult { times, iterates, residuals, diverged })
}

/// ψ(x) ↦ λ^{a}ψ(λx) with a = ½ for ℓ = 1 and a = 1 for ℓ = 2.
///
/// The dilated field lives on the box of side L/λ with the same index
/// lattice: every mode ξ moves to λξ, so nothing can leave the lattice.
pub fn scaling_transform(f: &SpinorField, lam: f64, ell: NonlinearitySelector) -> Result<SpinorField> {
    if !(lam.is_finite() && lam > 0.0) {
        return Err(Error::invalid("lam", format!("need a finite positive dilation, got {lam}")));
    }
    let a = match ell {
        NonlinearitySelector::Power => 0.5,
        NonlinearitySelector::Hartree => 1.0,
    };
    let grid = Grid2D::new(f.grid().n(), f.grid().box_length() / lam)?;
    let factor = match f.repr() {
        Representation::Physical => lam.powf(a),
        // continuum transform of ψ(λ·) is λ⁻²ψ̂(·/λ)
        Representation::Frequency => lam.powf(a - 2.0),
    };
    let mut out = f.clone().relabel_grid(grid)?;
    out.scale(Complex64::new(factor, 0.0));
    Ok(out)
}

/// Flow covariance under dilation for ℓ = 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceCheck {
    /// ‖evolve(T_λψ₀, t) − T_λ evolve(ψ₀, λt)‖ / ‖T_λ evolve(ψ₀, λt)‖.
    pub discrepancy: f64,
    /// Step-halving estimate of the time discretization error of both runs, same normalization.
    pub discretization_error: f64,
}

/// Compare evolving dilated data with dilating the evolved data. The two
/// runs use deliberately different step counts, so the discrepancy
/// can only be as small as their discretization errors.
pub fn scaling_covariance_check(psi0: &SpinorField, lam: f64, t: f64, dt: f64, p: &DiracParams) -> Result<CovarianceCheck> {
    let scaled0 = scaling_transform(psi0, lam, p.ell)?;
    let run = |data: &SpinorField, horizon: f64, step: f64| -> Result<SpinorField> {
        Ok(evolve_to(&split_initial_data(data, p), horizon, step, p)?.psi())
    };
    // dilated run with step dt, reference run with the same step on the long horizon
    let a = run(&scaled0, t, dt)?;
    let a2 = run(&scaled0, t, 0.5 * dt)?;
    let b_raw = run(psi0, lam * t, dt)?;
    let b2_raw = run(psi0, lam * t, 0.5 * dt)?;
    let b = scaling_transform(&b_raw, lam, p.ell)?;
    let b2 = scaling_transform(&b2_raw, lam, p.ell)?;
    let scale = b.l2_norm();
    // Richardson: error of the coarse run ≈ 4/3 ‖u_dt − u_dt/2‖
    let ea = a.sub(&a2)?.l2_norm() * 4.0 / 3.0;
    let eb = b.sub(&b2)?.l2_norm() * 4.0 / 3.0;
    Ok(CovarianceCheck { discrepancy: a.sub(&b)?.l2_norm() / scale, discretization_error: (ea + eb) / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::half_wave_propagate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn smooth(g: Grid2D, seed: u64, amp: f64) -> SpinorField {
        let mut f = SpinorField::random_band_limited(g, seed, 4, |xi| (-0.05 * (xi[0] * xi[0] + xi[1] * xi[1])).exp());
        let n = f.l2_norm();
        f.scale(c(amp / n, 0.0));
        f.in_physical()
    }

    #[test]
    fn split_reconstructs_data() {
        let g = Grid2D::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let f = SpinorField::random_band_limited(g, 3, 8, |_| 1.0);
        let s = split_initial_data(&f, &DiracParams::default().with_lambda_sharp(c(2.0, 1.0)));
        assert!(s.psi().sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn plus_eigenvector_has_no_minus_part() {
        let g = Grid2D::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let p = DiracParams::default();
        let f = SpinorField::plane_wave(g, [2, 0], [c(1.0, 0.0), c(1.0, 0.0)]);
        let s = split_initial_data(&f, &p);
        assert!(s.psi_minus.l2_norm() < 1e-13);
    }

    #[test]
    fn free_rhs_of_plus_plane_wave() {
        let g = Grid2D::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let p = DiracParams::default().with_kappa(0.0);
        let f = SpinorField::plane_wave(g, [3, 4], [c(1.0, 0.0), c(0.0, 0.0)]);
        let f_plus = dirac_projection(&f, Sign::Plus, &p);
        let s = SplitState { psi_plus: f_plus.in_frequency(), psi_minus: SpinorField::zeros(g, Representation::Frequency), time: 0.0 };
        let (dp, dm) = rhs(&s, &p).unwrap();
        let want = f_plus.scaled(c(0.0, -5.0));
        assert!(dp.sub(&want).unwrap().l2_norm() < 1e-12 * want.l2_norm());
        assert!(dm.l2_norm() < 1e-14);
    }

    #[test]
    fn hamiltonian_rhs_has_no_charge_flux() {
        let g = Grid2D::new(32, 4.0).unwrap();
        for ell in [NonlinearitySelector::Power, NonlinearitySelector::Hartree] {
            let p = DiracParams::default().with_kappa(2.0).with_ell(ell).with_lambda_sharp(c(2.0, 1.0));
            let s = split_initial_data(&smooth(g, 5, 3.0), &p);
            let (dp, dm) = rhs(&s, &p).unwrap();
            let flux = s.psi().inner(&dp.add(&dm).unwrap()).unwrap().re;
            assert!(flux.abs() <= 1e-10 * s.charge(), "{flux}");
        }
    }

    #[test]
    fn zero_coupling_step_is_the_free_flow() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let p = DiracParams::default().with_kappa(0.0);
        let f = smooth(g, 6, 1.0);
        let s = step_strang(&split_initial_data(&f, &p), 0.37, &p).unwrap();
        for sign in Sign::BOTH {
            let want = half_wave_propagate(&dirac_projection(&f, sign, &p), 0.37, sign).unwrap();
            assert!(s.part(sign).sub(&want).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
        }
    }

    #[test]
    fn rejects_bad_steps() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let s = split_initial_data(&SpinorField::zeros(g, Representation::Physical), &DiracParams::default());
        assert!(step_strang(&s, 0.0, &DiracParams::default()).is_err());
        assert!(step_strang(&s, f64::NAN, &DiracParams::default()).is_err());
    }

    #[test]
    fn diagnostics_csv_has_requested_columns() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let p = DiracParams::default();
        let s = split_initial_data(&smooth(g, 1, 0.1), &p);
        let (_, rows) = evolve(&s, 0.01, 3, &p, &[0.0, 1.0], 1).unwrap();
        let mut buf = Vec::new();
        write_diagnostics_csv(&rows, &[0.0, 1.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,time,charge,Hs_0,Hs_1\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn scaling_identity_and_invariant_norms() {
        let g = Grid2D::new(32, 8.0).unwrap();
        let f = smooth(g, 2, 1.0);
        let same = scaling_transform(&f, 1.0, NonlinearitySelector::Power).unwrap();
        assert_eq!(same, f);
        for lam in [0.5, 2.0, 4.0, 3.3] {
            let h = scaling_transform(&f, lam, NonlinearitySelector::Power).unwrap();
            let a = sobolev_norm(&f, 0.5, true).unwrap();
            let b = sobolev_norm(&h, 0.5, true).unwrap();
            assert!((a - b).abs() <= 1e-10 * a);
            let h2 = scaling_transform(&f.in_frequency(), lam, NonlinearitySelector::Hartree).unwrap();
            assert!((h2.l2_norm() - f.l2_norm()).abs() <= 1e-10 * f.l2_norm());
            assert!(scaling_transform(&f, -lam, NonlinearitySelector::Power).is_err());
        }
    }

    #[test]
    fn picard_with_zero_coupling_is_already_converged() {
        let g = Grid2D::new(16, 4.0).unwrap();
        let p = DiracParams::default().with_kappa(0.0);
        let cfg = PicardConfig { t_final: 0.1, n_iter: 2, quadrature_points: 5, delta: 0.01, s: 1.0 };
        let r = picard_iterate(&smooth(g, 1, 0.01), &cfg, &p).unwrap();
        assert_eq!(r.residuals[0], 0.0);
        assert!(!r.diverged);
    }
}
