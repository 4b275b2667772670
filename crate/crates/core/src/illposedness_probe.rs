//! Smoothness-failure construction: box data, the exact trilinear Duhamel
//! term at the first Picard iterate, a finite-difference oracle through the
//! nonlinear flow, and the λ-sweep exponent fit.
//!
//! The trilinear term is evaluated by direct summation over the Fourier
//! support S of φ. With factors A (unconjugated, frequency η₁), B
//! (conjugated, η₂) and C (η₃), the output frequency is ξ = η₁ − η₂ + η₃, the
//! density frequency is σ = η₁ − η₂ and the time integral is done in closed
//! form through the phase
//!
//! ω = ±₁|ξ| − ±_A|η₁| + ±_B|η₂| − ±_C|η₃|.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve_to, split_initial_data};
use crate::fit::{fit_loglog, LineFit};
use crate::par;
use crate::spectral_core::field::Representation;
use crate::spectral_core::{half_wave_propagate, sobolev_norm, dirac_projection, DiracParams, Grid2D, NonlinearitySelector, Sign, SpinorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IllposednessConfig {
    pub s: f64,
    pub ell: NonlinearitySelector,
    pub epsilon: f64,
    pub delta: f64,
    pub lambdas: Vec<f64>,
    /// Box half-width μ in lattice cells, so dk = μ/cells.
    #[serde(default = "default_cells")]
    pub cells_per_half_width: usize,
    /// Grid size; `None` picks the smallest power of two that keeps the
    /// cubic output inside the dealiased band.
    #[serde(default)]
    pub n: Option<usize>,
    /// Apply Π^± to the inner free factors as well.
    #[serde(default)]
    pub inner_projection: bool,
    /// Sub-lattice step for (η₁, η₃) in the summation.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Largest number of (η₁, η₂, η₃) triples allowed per evaluation.
    #[serde(default = "default_budget")]
    pub max_terms: u64,
    #[serde(default)]
    pub params: DiracParams,
}

fn default_cells() -> usize {
    6
}
fn default_stride() -> usize {
    1
}
fn default_budget() -> u64 {
    50_000_000
}

impl Default for IllposednessConfig {
    fn default() -> Self {
        Self {
            s: 0.25,
            ell: NonlinearitySelector::Power,
            epsilon: 0.05,
            delta: 0.01,
            lambdas: vec![16.0, 32.0, 64.0, 128.0],
            cells_per_half_width: default_cells(),
            n: None,
            inner_projection: false,
            stride: default_stride(),
            max_terms: default_budget(),
            params: DiracParams::default(),
        }
    }
}

impl IllposednessConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::invalid("s", "must be finite"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid("epsilon", format!("need 0 < epsilon < 1, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta", format!("need delta > 0, got {}", self.delta)));
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l > 1.0)) {
            return Err(Error::invalid("lambdas", "values must exceed 1"));
        }
        if self.cells_per_half_width == 0 {
            return Err(Error::invalid("cells_per_half_width", "must be at least 1"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        self.params.validate()
    }

    pub fn mu(&self, lam: f64) -> f64 {
        lam.powf(1.0 - self.epsilon)
    }

    pub fn time(&self, lam: f64) -> f64 {
        self.delta * lam.powf(-1.0 - self.epsilon)
    }

    /// Parameters with the configured nonlinearity.
    pub fn dirac_params(&self) -> DiracParams {
        self.params.with_ell(self.ell)
    }

    /// Lattice for scale λ: dk = μ/cells, n large enough that the box and
    /// the cubic output (λ ± 3μ) stay inside the 2/3 band.
    pub fn grid_for(&self, lam: f64) -> Result<Grid2D> {
        let m = self.cells_per_half_width as i64;
        let dk = self.mu(lam) / m as f64;
        let c = (lam / dk).round() as i64;
        let need = c + 3 * m;
        let n = match self.n {
            Some(n) => n,
            None => {
                let mut n = 16usize;
                while (n as i64) / 3 < need {
                    n *= 2;
                }
                n
            }
        };
        let g = Grid2D::with_spacing(n, dk)?;
        if need > n as i64 / 3 {
            return Err(Error::invalid("n", format!("box output reaches lattice index {need}, beyond the dealiased band of n = {n}")));
        }
        Ok(g)
    }

    pub fn predicted_slope(&self) -> f64 {
        let sc = self.ell.critical_index();
        2.0 * (sc - self.s) - self.epsilon * (2.0 + 2.0 * sc)
    }
}

/// φ = (𝓕⁻¹χ_B, 0) with B the lattice box of half-width μ centred at the
/// lattice point nearest (λ, 0).
pub fn box_data(lam: f64, mu: f64, grid: &Grid2D) -> Result<SpinorField> {
    if !(lam > 0.0 && mu > 0.0 && lam.is_finite() && mu.is_finite()) {
        return Err(Error::invalid("lam/mu", format!("need positive values, got lam = {lam}, mu = {mu}")));
    }
    let dk = grid.dk();
    let c = (lam / dk).round() as i64;
    let m = (mu / dk * (1.0 + 1e-9)).floor() as i64;
    let half = grid.n() as i64 / 2;
    if c + m >= half || m >= half {
        return Err(Error::invalid("lam", format!("box [{}, {}]×[−{m}, {m}] (cells) exceeds the lattice of n = {}", c - m, c + m, grid.n())));
    }
    let mut f = SpinorField::zeros(*grid, Representation::Frequency);
    let first = f.component_mut(0);
    for i in (c - m)..=(c + m) {
        for j in -m..=m {
            let idx = grid.index(grid.storage_index(i).unwrap(), grid.storage_index(j).unwrap());
            first[idx] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(f)
}

/// ∫₀ᵗ e^{iωt′}dt′ = (e^{itω} − 1)/(iω), with the ω → 0 limit t.
pub fn phase_integral(t: f64, omega: f64) -> Complex64 {
    let z = t * omega;
    if z.abs() < 1e-3 {
        // Taylor series of (e^{iz} − 1)/(iz); eight terms reach 1e-27
        let iz = Complex64::new(0.0, z);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..=8 {
            term = term * iz / k as f64;
            sum += term;
        }
        sum * t
    } else {
        (Complex64::from_polar(1.0, z) - 1.0) / Complex64::new(0.0, omega)
    }
}

/// Kernel p(t, ξ, …) for one sign tuple: e^{∓₁it|ξ|}(e^{itω} − 1)/(iω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilinearKernel {
    pub signs: [Sign; 4],
}

impl TrilinearKernel {
    pub fn omega(&self, xi: f64, eta1: f64, eta2: f64, eta3: f64) -> f64 {
        let [s1, sa, sb, sc] = self.signs.map(Sign::value);
        s1 * xi - sa * eta1 + sb * eta2 - sc * eta3
    }

    /// Arguments are the magnitudes |ξ|, |η₁|, |η₂|, |η₃|.
    pub fn value(&self, t: f64, xi: f64, eta1: f64, eta2: f64, eta3: f64) -> Complex64 {
        let w = self.omega(xi, eta1, eta2, eta3);
        Complex64::from_polar(1.0, -self.signs[0].value() * t * xi) * phase_integral(t, w)
    }

    pub fn all() -> impl Iterator<Item = TrilinearKernel> {
        (0..16).map(|m| TrilinearKernel { signs: [0, 1, 2, 3].map(|b| if m >> b & 1 == 0 { Sign::Plus } else { Sign::Minus }) })
    }
}

struct SupportPoint {
    k: [i64; 2],
    abs: f64,
    /// Spinor coefficient of the inner factor for sign + and −.
    coef: [[Complex64; 2]; 2],
}

fn support(phi: &SpinorField, p: &DiracParams, inner_projection: bool) -> Vec<SupportPoint> {
    let g = *phi.grid();
    let f = phi.in_frequency();
    let proj = |s: Sign| if inner_projection { dirac_projection(&f, s, p) } else { f.clone() };
    let (fp, fm) = (proj(Sign::Plus), proj(Sign::Minus));
    let mut pts = Vec::new();
    for idx in 0..g.len() {
        let a = [f.component(0)[idx], f.component(1)[idx]];
        if a[0].norm_sqr() + a[1].norm_sqr() == 0.0 {
            continue;
        }
        let n = g.n();
        pts.push(SupportPoint {
            k: [g.wavenumber(idx / n), g.wavenumber(idx % n)],
            abs: g.abs_xi(idx),
            coef: [[fp.component(0)[idx], fp.component(1)[idx]], [fm.component(0)[idx], fm.component(1)[idx]]],
        });
    }
    pts
}

fn sign_slot(s: Sign) -> usize {
    match s {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

/// ℒ_ℓ(φ)(t) = Σ over the 16 sign tuples of
/// ∫₀ᵗ S_{±₁}(t − t′)Π^{±₁}(D) N_ℓ(S_{±₂}(t′)φ, S_{±₃}(t′)φ) S_{±₄}(t′)φ dt′,
/// without the coupling constant.
pub fn trilinear_term(phi: &SpinorField, t: f64, cfg: &IllposednessConfig) -> Result<SpinorField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("need t >= 0, got {t}")));
    }
    if cfg.stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    let p = cfg.dirac_params();
    let g = *phi.grid();
    let n = g.n() as i64;
    let pts = support(phi, &p, cfg.inner_projection);
    let stride = cfg.stride as i64;
    let sub: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].k[0].rem_euclid(stride) == 0 && pts[i].k[1].rem_euclid(stride) == 0).collect();
    let terms = (sub.len() as u64).pow(2).saturating_mul(pts.len() as u64);
    if terms > cfg.max_terms {
        return Err(Error::BudgetExceeded(format!(
            "{terms} summation terms exceed max_terms = {}; raise stride (now {}) or lower cells_per_half_width",
            cfg.max_terms, cfg.stride
        )));
    }
    let mut out = SpinorField::zeros(g, Representation::Frequency);
    if t == 0.0 || pts.is_empty() {
        return Ok(out);
    }
    let weight_scale = (stride as f64).powi(4);
    let cmat = [[p.b1, 2.0 * p.b2], [2.0 * p.b2, p.b1]];
    let hartree = p.ell == NonlinearitySelector::Hartree;
    let dk = g.dk();
    let kernels: Vec<TrilinearKernel> = TrilinearKernel::all().collect();

    // accumulate per output frequency and outer sign; chunks over η₁ reduce in order
    let chunks = sub.len().clamp(1, 16);
    let partials = par::map_range(chunks, |ci| {
        let mut acc = vec![[[ZERO; 2]; 2]; g.len()];
        let mut outside = false;
        for &a in sub.iter().skip(ci).step_by(chunks) {
            let pa = &pts[a];
            for pb in &pts {
                let sig = [pa.k[0] - pb.k[0], pa.k[1] - pb.k[1]];
                let w = if hartree {
                    let r = dk * (sig[0] as f64).hypot(sig[1] as f64);
                    if r == 0.0 {
                        continue;
                    }
                    TWO_PI / r
                } else {
                    1.0
                };
                for &c in &sub {
                    let pc = &pts[c];
                    let xk = [sig[0] + pc.k[0], sig[1] + pc.k[1]];
                    if xk.iter().any(|k| *k < -n / 2 || *k >= n / 2) {
                        outside = true;
                        continue;
                    }
                    let oi = g.index(g.storage_index(xk[0]).unwrap(), g.storage_index(xk[1]).unwrap());
                    let xabs = dk * (xk[0] as f64).hypot(xk[1] as f64);
                    let slot = &mut acc[oi];
                    for kern in &kernels {
                        let [s1, sa, sb, sc] = kern.signs;
                        let (ua, ub, uc) = (pa.coef[sign_slot(sa)], pb.coef[sign_slot(sb)], pc.coef[sign_slot(sc)]);
                        let v = if hartree {
                            let rho = ub[0].conj() * ua[0] + ub[1].conj() * ua[1];
                            [rho * uc[0], rho * uc[1]]
                        } else {
                            let m = [ua[0] * ub[0].conj(), ua[1] * ub[1].conj()];
                            [(m[0] * cmat[0][0] + m[1] * cmat[0][1]) * uc[0], (m[0] * cmat[1][0] + m[1] * cmat[1][1]) * uc[1]]
                        };
                        if v[0] == ZERO && v[1] == ZERO {
                            continue;
                        }
                        let k = kern.value(t, xabs, pa.abs, pb.abs, pc.abs) * w;
                        let o = &mut slot[sign_slot(s1)];
                        o[0] += k * v[0];
                        o[1] += k * v[1];
                    }
                }
            }
        }
        (acc, outside)
    });
    let mut acc = vec![[[ZERO; 2]; 2]; g.len()];
    for (part, outside) in partials {
        if outside {
            return Err(Error::invalid("n", format!("trilinear output leaves the lattice of n = {}", g.n())));
        }
        for (a, b) in acc.iter_mut().zip(part) {
            for s in 0..2 {
                a[s][0] += b[s][0];
                a[s][1] += b[s][1];
            }
        }
    }
    let norm = (dk / TWO_PI).powi(4) * weight_scale;
    for (idx, a) in acc.iter().enumerate() {
        let xi = g.xi(idx);
        let mut v = [ZERO; 2];
        for s in Sign::BOTH {
            let pm = p.projection_matrix(xi, s);
            let u = a[sign_slot(s)];
            v[0] += pm[0][0] * u[0] + pm[0][1] * u[1];
            v[1] += pm[1][0] * u[0] + pm[1][1] * u[1];
        }
        out.component_mut(0)[idx] = v[0] * norm;
        out.component_mut(1)[idx] = v[1] * norm;
    }
    Ok(out)
}

/// Cubic coefficient of ψ_δ(t) − δ·(free evolution of φ), fitted from runs
/// at the given amplitudes with the basis δ, δ³, δ⁵.
#[derive(Debug, Clone)]
pub struct OracleFit {
    pub cubic: SpinorField,
    pub linear: SpinorField,
    /// ‖linear‖/‖δ-free part‖ at δ = 1.
    pub linear_relative: f64,
    pub condition: f64,
}

pub fn free_evolution(phi: &SpinorField, t: f64, p: &DiracParams) -> Result<SpinorField> {
    let mut out = SpinorField::zeros(*phi.grid(), Representation::Frequency);
    for s in Sign::BOTH {
        let part = half_wave_propagate(&dirac_projection(&phi.in_frequency(), s, p), t, s)?;
        out.axpy(Complex64::new(1.0, 0.0), &part.in_frequency())?;
    }
    Ok(out)
}

/// Extracts ∂³_δψ(t)/6 from the nonlinear flow by least squares in δ.
pub fn flow_third_derivative_oracle(phi: &SpinorField, t: f64, cfg: &IllposednessConfig, amplitudes: &[f64], steps: usize) -> Result<OracleFit> {
    let p = cfg.dirac_params();
    if amplitudes.len() < 3 || amplitudes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::Regression(format!("need at least 3 positive amplitudes, got {amplitudes:?}")));
    }
    if steps == 0 || !(t > 0.0) {
        return Err(Error::invalid("steps", "need steps >= 1 and t > 0"));
    }
    // normal equations for the odd basis, scaled by the largest amplitude
    let amax = amplitudes.iter().cloned().fold(0.0, f64::max);
    let basis = |d: f64| [d / amax, (d / amax).powi(3), (d / amax).powi(5)];
    let mut ata = [[0.0f64; 3]; 3];
    for &d in amplitudes {
        let b = basis(d);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += b[i] * b[j];
            }
        }
    }
    let inv = invert3(&ata).ok_or_else(|| Error::Regression("singular amplitude design; use distinct amplitudes".into()))?;
    let condition = norm3(&ata) * norm3(&inv);
    if condition > 1e10 {
        return Err(Error::Regression(format!("amplitude design condition {condition:.2e}; spread the amplitudes over a wider range")));
    }
    let free = free_evolution(phi, t, &p)?;
    let residuals: Vec<SpinorField> = amplitudes
        .iter()
        .map(|&d| {
            let data = phi.scaled(Complex64::new(d, 0.0));
            let st = evolve_to(&split_initial_data(&data, &p), t, t / steps as f64, &p)?;
            let mut r = st.psi().in_frequency();
            r.axpy(Complex64::new(-d, 0.0), &free)?;
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let g = *phi.grid();
    let mut coef = [SpinorField::zeros(g, Representation::Frequency), SpinorField::zeros(g, Representation::Frequency), SpinorField::zeros(g, Representation::Frequency)];
    for (res, &d) in residuals.iter().zip(amplitudes) {
        let b = basis(d);
        for i in 0..3 {
            let w: f64 = (0..3).map(|j| inv[i][j] * b[j]).sum();
            coef[i].axpy(Complex64::new(w, 0.0), res)?;
        }
    }
    let [lin, cub, _] = coef;
    let cubic = cub.scaled(Complex64::new(amax.powi(-3), 0.0));
    let linear = lin.scaled(Complex64::new(1.0 / amax, 0.0));
    let linear_relative = linear.l2_norm() / free.l2_norm().max(f64::MIN_POSITIVE);
    Ok(OracleFit { cubic, linear, linear_relative, condition })
}

fn norm3(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    Some(inv)
}

/// Best single complex constant c with oracle ≈ c·term, and the agreement
/// measures used to compare the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportionality {
    pub constant: Complex64,
    pub cosine: f64,
    /// Largest relative mode deviation over modes above 10% of the peak.
    pub max_dominant_deviation: f64,
}

pub fn compare_proportional(term: &SpinorField, oracle: &SpinorField) -> Result<Proportionality> {
    term.grid().ensure_same(oracle.grid())?;
    let (a, b) = (term.in_frequency(), oracle.in_frequency());
    let mut ab = ZERO;
    let (mut aa, mut bb) = (0.0, 0.0);
    let mut peak = 0.0f64;
    for k in 0..2 {
        for (x, y) in a.component(k).iter().zip(b.component(k)) {
            ab += x.conj() * y;
            aa += x.norm_sqr();
            bb += y.norm_sqr();
            peak = peak.max(y.norm());
        }
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::Undefined("proportionality of a zero field".into()));
    }
    let c = ab / aa;
    let mut dev = 0.0f64;
    for k in 0..2 {
        for (x, y) in a.component(k).iter().zip(b.component(k)) {
            if y.norm() >= 0.1 * peak {
                dev = dev.max((y - c * x).norm() / y.norm());
            }
        }
    }
    Ok(Proportionality { constant: c, cosine: ab.norm() / (aa * bb).sqrt(), max_dominant_deviation: dev })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllposedRow {
    pub ell: u8,
    pub s: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub t: f64,
    #[serde(rename = "phi_Hs")]
    pub phi_hs: f64,
    #[serde(rename = "L_Hs")]
    pub l_hs: f64,
    pub ratio: f64,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllposedReport {
    pub rows: Vec<IllposedRow>,
    pub fit: LineFit,
    pub predicted_slope: f64,
}

impl IllposedReport {
    pub fn slope_sign(&self) -> i8 {
        if self.fit.slope > 0.0 {
            1
        } else if self.fit.slope < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// ℒ_ℓ(φ_λ)(t_λ) for each λ of the sweep, with its box data.
pub fn sweep_terms(cfg: &IllposednessConfig) -> Result<Vec<(f64, SpinorField, SpinorField)>> {
    cfg.validate()?;
    cfg.lambdas
        .iter()
        .map(|&lam| {
            let grid = cfg.grid_for(lam)?;
            let phi = box_data(lam, cfg.mu(lam), &grid)?;
            let l = trilinear_term(&phi, cfg.time(lam), cfg)?;
            Ok((lam, phi, l))
        })
        .collect()
}

/// Report for one Sobolev index from precomputed sweep terms.
pub fn sweep_report(cfg: &IllposednessConfig, terms: &[(f64, SpinorField, SpinorField)], s: f64) -> Result<IllposedReport> {
    let probe = IllposednessConfig { s, ..cfg.clone() };
    let mut rows = Vec::new();
    for (lam, phi, l) in terms {
        let phi_hs = sobolev_norm(phi, s, false)?;
        let l_hs = sobolev_norm(l, s, false)?;
        rows.push(IllposedRow {
            ell: cfg.ell.ell(),
            s,
            epsilon: cfg.epsilon,
            delta: cfg.delta,
            lambda: *lam,
            mu: cfg.mu(*lam),
            t: cfg.time(*lam),
            phi_hs,
            l_hs,
            ratio: l_hs / phi_hs.powi(3),
            fitted_slope: f64::NAN,
            predicted_slope: probe.predicted_slope(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let fit = fit_loglog(&xs, &ys)?;
    rows.iter_mut().for_each(|r| r.fitted_slope = fit.slope);
    Ok(IllposedReport { rows, fit, predicted_slope: probe.predicted_slope() })
}

/// R(λ) = ‖ℒ_ℓ(φ)(t)‖_{H^s}/‖φ‖³_{H^s} along the λ sweep, with its fitted
/// slope against 2(s(ℓ) − s) − ε(2 + 2s(ℓ)).
pub fn smoothness_failure_sweep(cfg: &IllposednessConfig) -> Result<IllposedReport> {
    if cfg.lambdas.len() < 3 {
        return Err(Error::Regression(format!("{} λ values, need at least 3", cfg.lambdas.len())));
    }
    let terms = sweep_terms(cfg)?;
    sweep_report(cfg, &terms, cfg.s)
}

/// Smallest |𝓕ℒ(ξ)| over the central part of the box (half-width μ/2).
pub fn central_lower_envelope(l: &SpinorField, lam: f64, mu: f64) -> f64 {
    let g = *l.grid();
    let f = l.in_frequency();
    let c = (lam / g.dk()).round() * g.dk();
    let mut m = f64::INFINITY;
    for idx in 0..g.len() {
        let xi = g.xi(idx);
        if (xi[0] - c).abs() <= 0.5 * mu && xi[1].abs() <= 0.5 * mu {
            let v = (f.component(0)[idx].norm_sqr() + f.component(1)[idx].norm_sqr()).sqrt();
            m = m.min(v);
        }
    }
    m
}
