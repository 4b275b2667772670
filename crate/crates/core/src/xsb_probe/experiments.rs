//! Exponent-fitting sweeps for the cone L⁴ estimate and the bilinear bounds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::packets::{random_phase_packet, trial_rng, weighted_l4_ascent, xsb_weights, Ball, ConePacketSpec, XsbParams};
use super::spacetime::{fft3, PaddedTransform, SpacetimeField, SpacetimeLattice, SpectralFrame};
use crate::error::{Error, Result};
use crate::fit::{fit_loglog, LineFit};
use crate::par;
use crate::spectral_core::Sign;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One CSV row of an experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XsbRow {
    pub experiment: String,
    pub sign_pair: String,
    pub param_name: String,
    pub param_value: f64,
    pub trial_max_ratio: f64,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
}

/// Maxima over trials along one parameter sweep and their log-log fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub sign_pair: String,
    pub param_name: String,
    pub values: Vec<f64>,
    pub maxima: Vec<f64>,
    pub fit: LineFit,
    pub target_slope: Option<f64>,
}

impl Sweep {
    fn new(sign_pair: &str, param_name: &str, values: Vec<f64>, maxima: Vec<f64>, target_slope: Option<f64>) -> Result<Self> {
        let fit = fit_loglog(&values, &maxima)?;
        Ok(Self { sign_pair: sign_pair.into(), param_name: param_name.into(), values, maxima, fit, target_slope })
    }

    pub fn within(&self, tol: f64) -> Option<bool> {
        self.target_slope.map(|t| (self.fit.slope - t).abs() <= tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub sweeps: Vec<Sweep>,
}

impl ExperimentReport {
    pub fn rows(&self) -> Vec<XsbRow> {
        self.sweeps
            .iter()
            .flat_map(|sw| {
                sw.values.iter().zip(&sw.maxima).map(move |(v, m)| XsbRow {
                    experiment: self.experiment.clone(),
                    sign_pair: sw.sign_pair.clone(),
                    param_name: sw.param_name.clone(),
                    param_value: *v,
                    trial_max_ratio: *m,
                    fitted_slope: sw.fit.slope,
                    slope_stderr: sw.fit.slope_stderr,
                })
            })
            .collect()
    }

    pub fn sweep(&self, sign_pair: &str, param_name: &str) -> Option<&Sweep> {
        self.sweeps.iter().find(|s| s.sign_pair == sign_pair && s.param_name == param_name)
    }
}

fn check_sweep(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::Regression(format!("{name} has {} points, need at least 3", v.len())));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::invalid(name, "values must be positive"));
    }
    Ok(())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    Ok(())
}

fn geometric(base: f64, ratio: f64, m: usize) -> Vec<f64> {
    (0..m).map(|k| base * ratio.powi(k as i32)).collect()
}

fn sign_label(s: Sign) -> String {
    s.symbol().to_string()
}

/// Maximum over trials of a per-trial ratio; trials run in parallel on
/// independent RNG streams.
fn trial_max<F>(trials: usize, f: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    let out = par::map_range(trials, f);
    let mut best = 0.0f64;
    for r in out {
        best = best.max(r?);
    }
    Ok(best)
}

/// Sweep setup for the thickened-cone L⁴ ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct L4ConeConfig {
    pub lams: Vec<f64>,
    pub mus: Vec<f64>,
    #[serde(rename = "Ls")]
    pub ls: Vec<f64>,
    /// Values held fixed while another parameter is swept: (λ, μ, L).
    pub base: [f64; 3],
    pub sign: Sign,
    pub n: usize,
    pub nt: usize,
    pub dk: f64,
    pub trials: usize,
    pub ascent_iters: usize,
    pub seed: u64,
}

impl Default for L4ConeConfig {
    fn default() -> Self {
        let r = std::f64::consts::SQRT_2;
        Self {
            lams: geometric(248.0, r, 4),
            mus: geometric(44.0, r, 4),
            ls: geometric(1.0, r, 4),
            base: [248.0, 124.0, 1.0],
            sign: Sign::Plus,
            n: 64,
            nt: 64,
            dk: 4.0,
            trials: 16,
            ascent_iters: 12,
            seed: 0,
        }
    }
}

impl L4ConeConfig {
    pub fn validate(&self) -> Result<()> {
        check_sweep("lams", &self.lams)?;
        check_sweep("mus", &self.mus)?;
        check_sweep("Ls", &self.ls)?;
        check_trials(self.trials)?;
        if self.base.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::invalid("base", "values must be positive"));
        }
        Ok(())
    }
}

/// Strip half-width for a sweep: twice the largest Knapp width √(2λL),
/// capped by the lattice.
fn strip_for(points: &[(f64, f64, f64)], n: usize, dk: f64) -> f64 {
    let knapp = points.iter().map(|(lam, _, l)| (2.0 * lam * l).sqrt()).fold(0.0, f64::max);
    (2.0 * knapp).min((n / 2 - 1) as f64 * dk)
}

fn l4_point(cfg: &L4ConeConfig, lam: f64, mu: f64, l: f64, strip: f64, stream: u64) -> Result<f64> {
    let spec = ConePacketSpec {
        lam,
        l,
        ball: Some(Ball { center: [lam, 0.0], radius: mu }),
        sign: cfg.sign,
        seed: cfg.seed,
        strip_half_width: Some(strip),
    };
    let lat = spec.fitted_lattice(cfg.n, cfg.nt, cfg.dk)?;
    let (frame, mask) = spec.support(&lat)?;
    let w = vec![1.0; lat.len()];
    trial_max(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, (stream << 32) | t as u64);
        let u0 = random_phase_packet(lat, frame, &mask, &mut rng)?;
        Ok(weighted_l4_ascent(&u0, &mask, &w, cfg.ascent_iters).0)
    })
}

/// Ratio ‖u‖_{L⁴}/‖u‖_{L²} over ball-localized thickened-cone packets,
/// maximized over trials, swept in μ, λ and L separately.
pub fn l4_cone_experiment(cfg: &L4ConeConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let [lam0, mu0, l0] = cfg.base;
    let sweeps: [(&str, Vec<(f64, f64, f64)>, f64); 3] = [
        ("mu", cfg.mus.iter().map(|&m| (lam0, m, l0)).collect(), 0.25),
        ("lam", cfg.lams.iter().map(|&x| (x, mu0, l0)).collect(), 0.125),
        ("L", cfg.ls.iter().map(|&x| (lam0, mu0, x)).collect(), 0.375),
    ];
    let mut out = Vec::new();
    let mut stream = 0u64;
    for (name, pts, target) in sweeps {
        let strip = strip_for(&pts, cfg.n, cfg.dk);
        let mut values = Vec::new();
        let mut maxima = Vec::new();
        for &(lam, mu, l) in &pts {
            maxima.push(l4_point(cfg, lam, mu, l, strip, stream)?);
            stream += 1;
            values.push(match name {
                "mu" => mu,
                "lam" => lam,
                _ => l,
            });
        }
        out.push(Sweep::new(&sign_label(cfg.sign), name, values, maxima, Some(target))?);
    }
    Ok(ExperimentReport { experiment: "l4_cone".into(), sweeps: out })
}

/// Sweep setup for ‖P_μ(u₁ū₂)‖_{L²}/(‖u₁‖_{X^{s,b}}‖u₂‖_{X^{s,b}}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearConfig {
    pub s: f64,
    pub b: f64,
    pub mus: Vec<f64>,
    /// Packet scale λ₁ = λ₂ = lam_ratio·μ.
    pub lam_ratio: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Ball radius μ in lattice cells (dk = μ/cells); dτ is fitted to the cone slab.
    pub cells: usize,
    pub n: usize,
    pub nt: usize,
    pub trials: usize,
    pub ascent_iters: usize,
    pub seed: u64,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        Self {
            s: 0.5,
            b: 0.55,
            mus: geometric(4.0, std::f64::consts::SQRT_2, 4),
            lam_ratio: 2.0,
            l: 1.0,
            cells: 8,
            n: 32,
            nt: 32,
            trials: 16,
            ascent_iters: 10,
            seed: 0,
        }
    }
}

impl BilinearConfig {
    pub fn validate(&self) -> Result<()> {
        check_sweep("mus", &self.mus)?;
        check_trials(self.trials)?;
        if !(self.s.is_finite() && self.s > 0.375) {
            return Err(Error::invalid("s", format!("need s > 3/8, got {}", self.s)));
        }
        if !self.b.is_finite() {
            return Err(Error::invalid("b", "must be finite"));
        }
        if !(self.lam_ratio.is_finite() && self.lam_ratio >= 1.0) {
            return Err(Error::invalid("lam_ratio", "need lam_ratio >= 1"));
        }
        if !(self.l.is_finite() && self.l >= 1.0) {
            return Err(Error::invalid("L", "need L >= 1"));
        }
        if self.cells < 1 || 2 * self.cells >= self.n {
            return Err(Error::invalid("cells", format!("ball of {} cells does not fit {} modes", self.cells, self.n)));
        }
        Ok(())
    }
}

/// Two packets on the same spatial ball and the P_μ shell mask on the
/// doubled lattice where their product lives.
pub struct BilinearSetup {
    pub lattice: SpacetimeLattice,
    pub frames: [SpectralFrame; 2],
    pub masks: [Vec<bool>; 2],
    pub weights: [Vec<f64>; 2],
    pub shell: Vec<bool>,
}

impl BilinearSetup {
    pub fn new(cfg: &BilinearConfig, mu: f64, signs: [Sign; 2]) -> Result<Self> {
        let lam = cfg.lam_ratio * mu;
        let dk = mu / cfg.cells as f64;
        // |τ − λ| on the + cone over the ball, plus the slab thickness
        let grid = crate::spectral_core::Grid2D::with_spacing(cfg.n, dk)?;
        let mut reach = 0.0f64;
        for idx in 0..grid.len() {
            let xl = grid.xi(idx);
            if xl[0].hypot(xl[1]) <= mu * (1.0 + 1e-9) {
                reach = reach.max(((xl[0] + lam).hypot(xl[1]) - lam).abs());
            }
        }
        let margin = super::packets::TAU_MARGIN_CELLS;
        if cfg.nt <= 2 * margin {
            return Err(Error::invalid("nt", format!("need nt > {}", 2 * margin)));
        }
        let dtau = (reach + cfg.l) / (cfg.nt / 2 - margin) as f64;
        let lattice = SpacetimeLattice::with_spacings(cfg.n, cfg.nt, dk, dtau)?;
        let mut frames = [SpectralFrame::default(); 2];
        let mut masks = [Vec::new(), Vec::new()];
        let mut weights = [Vec::new(), Vec::new()];
        for j in 0..2 {
            let sg = signs[j];
            frames[j] = SpectralFrame { tau_offset: sg.value() * lam, xi_offset: [lam, 0.0], shear: [0.0, 0.0] };
            let spec = ConePacketSpec {
                lam,
                l: cfg.l,
                ball: Some(Ball { center: [lam, 0.0], radius: mu }),
                sign: sg,
                seed: cfg.seed,
                strip_half_width: None,
            };
            let xp = XsbParams::new(cfg.s, cfg.b, sg);
            weights[j] = xsb_weights(&lattice, &frames[j], &xp);
            let mut m = vec![false; lattice.len()];
            for (idx, slot) in m.iter_mut().enumerate() {
                let k = lattice.wavenumbers(idx);
                let (tau, xi) = frames[j].true_frequency(&lattice, k);
                let xl = [xi[0] - lam, xi[1]];
                if xl[0].hypot(xl[1]) <= mu * (1.0 + 1e-9) && (tau - sg.value() * xi[0].hypot(xi[1])).abs() <= cfg.l * (1.0 + 1e-12) {
                    *slot = true;
                }
            }
            if !m.iter().any(|x| *x) {
                return Err(Error::EmptyModeSet(format!("no lattice modes for {spec:?}")));
            }
            masks[j] = m;
        }
        let pt = PaddedTransform::new(&lattice);
        let [b0, b1, b2] = pt.big_dims();
        let mut shell = vec![false; pt.big_len()];
        for a in 0..b0 {
            for b in 0..b1 {
                for c in 0..b2 {
                    let x = PaddedTransform::big_wavenumber(b1, b) as f64 * dk;
                    let y = PaddedTransform::big_wavenumber(b2, c) as f64 * dk;
                    let r = x.hypot(y);
                    shell[(a * b1 + b) * b2 + c] = r >= mu && r < 2.0 * mu;
                }
            }
        }
        Ok(Self { lattice, frames, masks, weights, shell })
    }

    fn wnorm(c: &[Complex64], w: &[f64]) -> f64 {
        c.iter().zip(w).map(|(z, w)| z.norm_sqr() * w * w).sum::<f64>().sqrt()
    }

    /// ‖P_μ(u₁ū₂)‖_{L²}/(‖u₁‖_X‖u₂‖_X) and the shell-projected product samples.
    pub fn ratio(&self, pt: &PaddedTransform, f1: &[Complex64], f2: &[Complex64], c1: &[Complex64], c2: &[Complex64]) -> (f64, Vec<Complex64>) {
        let dims = pt.big_dims();
        let nb = pt.big_len() as f64;
        let mut g: Vec<Complex64> = f1.iter().zip(f2).map(|(a, b)| a * b.conj()).collect();
        fft3(&mut g, dims, false);
        let mut num = 0.0;
        for (z, &m) in g.iter_mut().zip(&self.shell) {
            if m {
                *z /= nb;
                num += z.norm_sqr();
            } else {
                *z = ZERO;
            }
        }
        let vol = self.lattice.volume();
        let r = (num * vol).sqrt() / (vol * Self::wnorm(c1, &self.weights[0]) * Self::wnorm(c2, &self.weights[1]));
        fft3(&mut g, dims, true);
        (r, g)
    }

    /// Alternating power ascent from the given starting packets.
    pub fn ascent(&self, u1: &SpacetimeField, u2: &SpacetimeField, iters: usize) -> f64 {
        let pt = PaddedTransform::new(&self.lattice);
        let (mut c1, mut c2) = (u1.coeffs.clone(), u2.coeffs.clone());
        let mut f1 = pt.to_samples(&c1);
        let mut f2 = pt.to_samples(&c2);
        let (mut best, mut gp) = self.ratio(&pt, &f1, &f2, &c1, &c2);
        let update = |src: Vec<Complex64>, j: usize| -> Option<Vec<Complex64>> {
            let mut c = pt.to_coeffs(src);
            for ((z, &m), w) in c.iter_mut().zip(&self.masks[j]).zip(&self.weights[j]) {
                *z = if m { *z / (w * w) } else { ZERO };
            }
            let nrm = Self::wnorm(&c, &self.weights[j]);
            if !(nrm > 0.0 && nrm.is_finite()) {
                return None;
            }
            c.iter_mut().for_each(|z| *z /= nrm);
            Some(c)
        };
        for _ in 0..iters {
            let Some(n1) = update(gp.iter().zip(&f2).map(|(g, b)| g * b).collect(), 0) else { break };
            c1 = n1;
            f1 = pt.to_samples(&c1);
            let (r, g) = self.ratio(&pt, &f1, &f2, &c1, &c2);
            best = best.max(r);
            let Some(n2) = update(g.iter().zip(&f1).map(|(g, a)| g.conj() * a).collect(), 1) else { break };
            c2 = n2;
            f2 = pt.to_samples(&c2);
            let (r, g) = self.ratio(&pt, &f1, &f2, &c1, &c2);
            best = best.max(r);
            gp = g;
        }
        best
    }
}

pub const SIGN_PAIRS: [[Sign; 2]; 4] = [[Sign::Plus, Sign::Plus], [Sign::Plus, Sign::Minus], [Sign::Minus, Sign::Plus], [Sign::Minus, Sign::Minus]];

/// Label of the envelope sweep (maximum over all sign pairs).
pub const ALL_PAIRS: &str = "all";

/// High-high bilinear ratio at λ₁ = λ₂ = lam_ratio·μ for all four sign pairs,
/// plus the envelope over pairs, each regressed against μ.
pub fn bilinear_product_experiment(cfg: &BilinearConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let target = 0.375 - cfg.s;
    let mut sweeps = Vec::new();
    let mut envelope = vec![0.0f64; cfg.mus.len()];
    for (pi, signs) in SIGN_PAIRS.iter().enumerate() {
        let mut maxima = Vec::new();
        for (mi, &mu) in cfg.mus.iter().enumerate() {
            let setup = BilinearSetup::new(cfg, mu, *signs)?;
            let stream = ((pi * cfg.mus.len() + mi) as u64) << 32;
            let m = trial_max(cfg.trials, |t| {
                let mut rng = trial_rng(cfg.seed, stream | t as u64);
                let u1 = random_phase_packet(setup.lattice, setup.frames[0], &setup.masks[0], &mut rng)?;
                let u2 = random_phase_packet(setup.lattice, setup.frames[1], &setup.masks[1], &mut rng)?;
                Ok(setup.ascent(&u1, &u2, cfg.ascent_iters))
            })?;
            envelope[mi] = envelope[mi].max(m);
            maxima.push(m);
        }
        let label = format!("{}{}", signs[0].symbol(), signs[1].symbol());
        sweeps.push(Sweep::new(&label, "mu", cfg.mus.clone(), maxima, Some(target))?);
    }
    sweeps.push(Sweep::new(ALL_PAIRS, "mu", cfg.mus.clone(), envelope, Some(target))?);
    Ok(ExperimentReport { experiment: "bilinear".into(), sweeps })
}

/// Sup of ‖u‖_{L⁴}/‖u‖_{X^{s,b}} over ball-localized cone packets with
/// modulation up to `l_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingProbeConfig {
    pub s: f64,
    pub b: f64,
    pub l_max: f64,
    pub n: usize,
    pub nt: usize,
    pub trials: usize,
    pub ascent_iters: usize,
    pub seed: u64,
}

impl Default for EmbeddingProbeConfig {
    fn default() -> Self {
        Self { s: 0.375, b: 0.55, l_max: 2.0, n: 32, nt: 32, trials: 16, ascent_iters: 12, seed: 0 }
    }
}

fn weighted_point(cfg: &EmbeddingProbeConfig, spec: &ConePacketSpec, dk: f64, stream: u64) -> Result<f64> {
    let lat = spec.fitted_lattice(cfg.n, cfg.nt, dk)?;
    let (frame, mask) = spec.support(&lat)?;
    let w = xsb_weights(&lat, &frame, &XsbParams::new(cfg.s, cfg.b, spec.sign));
    trial_max(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, (stream << 32) | t as u64);
        let u0 = random_phase_packet(lat, frame, &mask, &mut rng)?;
        let v0 = {
            // start from a flat X-normalized profile
            let mut v = u0.clone();
            for (z, wi) in v.coeffs.iter_mut().zip(&w) {
                *z /= *wi;
            }
            v
        };
        Ok(weighted_l4_ascent(&v0, &mask, &w, cfg.ascent_iters).0)
    })
}

/// ‖u‖_{L⁴}/‖u‖_{X^{3/8,b}} for dyadic pieces at scale λ (ball of radius
/// λ/2 at distance λ), swept in λ. Bounded means slope ≈ 0.
pub fn embedding_probe(cfg: &EmbeddingProbeConfig, lams: &[f64]) -> Result<ExperimentReport> {
    check_sweep("lams", lams)?;
    check_trials(cfg.trials)?;
    let cells = (cfg.n / 2 - 1) as f64;
    let mut maxima = Vec::new();
    for (i, &lam) in lams.iter().enumerate() {
        let mu = lam / 2.0;
        let dk = mu / cells;
        let spec = ConePacketSpec {
            lam,
            l: cfg.l_max,
            ball: Some(Ball { center: [lam, 0.0], radius: mu }),
            sign: Sign::Plus,
            seed: cfg.seed,
            strip_half_width: Some((4.0 * lam.sqrt()).min(cells * dk)),
        };
        maxima.push(weighted_point(cfg, &spec, dk, i as u64)?);
    }
    let sw = Sweep::new("+", "lam", lams.to_vec(), maxima, Some(0.0))?;
    Ok(ExperimentReport { experiment: "embedding".into(), sweeps: vec![sw] })
}

/// ‖P_{B_μ}u‖_{L⁴}/‖u‖_{X^{1/8,b}} at fixed λ, swept over ball radii μ.
pub fn ball_probe(cfg: &EmbeddingProbeConfig, lam: f64, mus: &[f64], dk: f64, strip: f64) -> Result<ExperimentReport> {
    check_sweep("mus", mus)?;
    check_trials(cfg.trials)?;
    let mut maxima = Vec::new();
    for (i, &mu) in mus.iter().enumerate() {
        let spec = ConePacketSpec {
            lam,
            l: cfg.l_max,
            ball: Some(Ball { center: [lam, 0.0], radius: mu }),
            sign: Sign::Plus,
            seed: cfg.seed,
            strip_half_width: Some(strip),
        };
        maxima.push(weighted_point(cfg, &spec, dk, i as u64)?);
    }
    let sw = Sweep::new("+", "mu", mus.to_vec(), maxima, Some(0.25))?;
    Ok(ExperimentReport { experiment: "ball".into(), sweeps: vec![sw] })
}
