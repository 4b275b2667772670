//! X^{s,b} weights, thickened-cone packets and norm-ratio ascent.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spacetime::{PaddedTransform, SpacetimeField, SpacetimeLattice, SpectralFrame};
use crate::error::{Error, Result};
use crate::spectral_core::Sign;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XsbParams {
    pub s: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_b_prime")]
    pub b_prime: f64,
    #[serde(default = "default_sign")]
    pub sign: Sign,
}

fn default_b() -> f64 {
    0.55
}
fn default_b_prime() -> f64 {
    -0.3
}
fn default_sign() -> Sign {
    Sign::Plus
}

impl Default for XsbParams {
    fn default() -> Self {
        Self { s: 0.0, b: default_b(), b_prime: default_b_prime(), sign: Sign::Plus }
    }
}

impl XsbParams {
    pub fn new(s: f64, b: f64, sign: Sign) -> Self {
        Self { s, b, sign, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("s", self.s), ("b", self.b), ("b_prime", self.b_prime)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// ⟨ξ⟩^s ⟨τ ∓ |ξ|⟩^b at a true frequency.
    pub fn weight(&self, tau: f64, xi: [f64; 2]) -> f64 {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        let m = tau - self.sign.value() * r2.sqrt();
        (1.0 + r2).powf(0.5 * self.s) * (1.0 + m * m).powf(0.5 * self.b)
    }
}

/// Weight of every lattice mode of `u`.
pub fn xsb_weights(lat: &SpacetimeLattice, frame: &SpectralFrame, p: &XsbParams) -> Vec<f64> {
    (0..lat.len())
        .map(|idx| {
            let (tau, xi) = frame.true_frequency(lat, lat.wavenumbers(idx));
            p.weight(tau, xi)
        })
        .collect()
}

/// X^{s,b}_± norm: ‖⟨ξ⟩^s⟨τ∓|ξ|⟩^b ũ‖ with continuum normalization.
pub fn xsb_norm(u: &SpacetimeField, p: &XsbParams) -> f64 {
    let lat = &u.lattice;
    let ss: f64 = u
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(idx, c)| {
            let (tau, xi) = u.frame.true_frequency(lat, lat.wavenumbers(idx));
            c.norm_sqr() * p.weight(tau, xi).powi(2)
        })
        .sum();
    (ss * lat.volume()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Thickened cone K^±_{λ,L}, optionally cut down to ℝ × B_μ and to a strip
/// of the given half-width transverse to the ball's direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConePacketSpec {
    pub lam: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub ball: Option<Ball>,
    pub sign: Sign,
    pub seed: u64,
    #[serde(default)]
    pub strip_half_width: Option<f64>,
}

/// Frequencies with |ξ| ≤ SPATIAL_CONSTANT·λ count as |ξ| ≲ λ.
pub const SPATIAL_CONSTANT: f64 = 2.0;
/// Empty τ planes kept between the packet and the τ-Nyquist edge.
pub const TAU_MARGIN_CELLS: usize = 4;

impl ConePacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lam.is_finite() && self.lam > 0.0) {
            return Err(Error::invalid("lam", format!("need lam > 0, got {}", self.lam)));
        }
        if !(self.l.is_finite() && self.l >= 1.0) {
            return Err(Error::invalid("L", format!("need L >= 1, got {}", self.l)));
        }
        if let Some(b) = self.ball {
            if !(b.radius.is_finite() && b.radius > 0.0 && b.center.iter().all(|c| c.is_finite())) {
                return Err(Error::invalid("ball", "need a finite center and radius > 0"));
            }
        }
        if let Some(w) = self.strip_half_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid("strip_half_width", format!("need > 0, got {w}")));
            }
        }
        Ok(())
    }

    fn center(&self) -> [f64; 2] {
        self.ball.map_or([0.0, 0.0], |b| b.center)
    }

    fn direction(&self) -> [f64; 2] {
        let c = self.center();
        let r = c[0].hypot(c[1]);
        if r > 0.0 {
            [c[0] / r, c[1] / r]
        } else {
            [0.0, 0.0]
        }
    }

    fn in_spatial_support(&self, xi: [f64; 2]) -> bool {
        const SLACK: f64 = 1e-9;
        let r = xi[0].hypot(xi[1]);
        if r > SPATIAL_CONSTANT * self.lam * (1.0 + SLACK) {
            return false;
        }
        let c = self.center();
        let d = [xi[0] - c[0], xi[1] - c[1]];
        if let Some(b) = self.ball {
            if d[0].hypot(d[1]) > b.radius * (1.0 + SLACK) {
                return false;
            }
        }
        if let Some(w) = self.strip_half_width {
            let e = self.direction();
            let perp = if e == [0.0, 0.0] { d[1] } else { -e[1] * d[0] + e[0] * d[1] };
            if perp.abs() > w * (1.0 + SLACK) {
                return false;
            }
        }
        true
    }

    /// |ξ| − e·ξ over the spatial support, where e is the ball direction.
    fn sagitta_range(&self, grid: &crate::spectral_core::Grid2D) -> Result<(f64, f64)> {
        let c = self.center();
        let e = self.direction();
        let mut range: Option<(f64, f64)> = None;
        for idx in 0..grid.len() {
            let xl = grid.xi(idx);
            let xi = [xl[0] + c[0], xl[1] + c[1]];
            if self.in_spatial_support(xi) {
                let sag = xi[0].hypot(xi[1]) - e[0] * xi[0] - e[1] * xi[1];
                range = Some(range.map_or((sag, sag), |(a, b)| (a.min(sag), b.max(sag))));
            }
        }
        range.ok_or_else(|| Error::EmptyModeSet(format!("no spatial modes for {self:?} with dk = {}", grid.dk())))
    }

    /// Frame whose shear follows the cone tangent at the ball center, so the
    /// packet occupies as few τ planes as possible.
    pub fn frame(&self, grid: &crate::spectral_core::Grid2D) -> Result<SpectralFrame> {
        let (lo, hi) = self.sagitta_range(grid)?;
        let sg = self.sign.value();
        let c = self.center();
        let e = self.direction();
        Ok(SpectralFrame {
            tau_offset: sg * (c[0].hypot(c[1]) + 0.5 * (lo + hi)),
            xi_offset: c,
            shear: [sg * e[0], sg * e[1]],
        })
    }

    /// Lattice with n × n spatial modes of spacing dk whose τ spacing fits the
    /// packet into nt planes with the standard margin.
    pub fn fitted_lattice(&self, n: usize, nt: usize, dk: f64) -> Result<SpacetimeLattice> {
        self.validate()?;
        let grid = crate::spectral_core::Grid2D::with_spacing(n, dk)?;
        let (lo, hi) = self.sagitta_range(&grid)?;
        if nt <= 2 * TAU_MARGIN_CELLS {
            return Err(Error::invalid("nt", format!("need nt > {}", 2 * TAU_MARGIN_CELLS)));
        }
        let extent = hi - lo + 2.0 * self.l;
        SpacetimeLattice::with_spacings(n, nt, dk, extent / (nt - 2 * TAU_MARGIN_CELLS) as f64)
    }

    /// Support mask on `lat` and the frame it is expressed in.
    pub fn support(&self, lat: &SpacetimeLattice) -> Result<(SpectralFrame, Vec<bool>)> {
        self.validate()?;
        let frame = self.frame(&lat.grid)?;
        let sg = self.sign.value();
        let dtau = lat.dtau();
        let reach = (lat.nt / 2 - TAU_MARGIN_CELLS) as f64 * dtau;
        let n2 = lat.grid.len();
        let mut mask = vec![false; lat.len()];
        let mut any = false;
        for r in 0..n2 {
            let (tau0, xi) = frame.true_frequency(lat, [0, lat.grid.wavenumber(r / lat.n()), lat.grid.wavenumber(r % lat.n())]);
            if !self.in_spatial_support(xi) {
                continue;
            }
            // τ_lat range that keeps |τ ∓ |ξ|| ≤ L
            let m0 = tau0 - sg * xi[0].hypot(xi[1]);
            if m0.abs() + self.l > reach * (1.0 + 1e-9) {
                return Err(Error::invalid("t_period", format!("cone slab of {self:?} does not fit inside the τ lattice margin (dτ = {dtau})")));
            }
            for it in 0..lat.nt {
                let kt = if it < lat.nt / 2 { it as i64 } else { it as i64 - lat.nt as i64 };
                let m = m0 + kt as f64 * dtau;
                if m.abs() <= self.l * (1.0 + 1e-12) {
                    mask[it * n2 + r] = true;
                    any = true;
                }
            }
        }
        if !any {
            return Err(Error::EmptyModeSet(format!("no lattice modes in the cone for {self:?}")));
        }
        Ok((frame, mask))
    }
}

/// Random-phase packet on `mask` with unit space-time L² norm.
pub fn random_phase_packet(lat: SpacetimeLattice, frame: SpectralFrame, mask: &[bool], rng: &mut ChaCha8Rng) -> Result<SpacetimeField> {
    let count = mask.iter().filter(|m| **m).count();
    if count == 0 {
        return Err(Error::EmptyModeSet("empty packet support".into()));
    }
    let amp = 1.0 / (count as f64 * lat.volume()).sqrt();
    let mut u = SpacetimeField::zeros(lat, frame);
    for (c, &m) in u.coeffs.iter_mut().zip(mask) {
        let th: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
        if m {
            *c = Complex64::from_polar(amp, th);
        }
    }
    Ok(u)
}

/// Per-trial generator: stream `trial` of the ChaCha8 sequence seeded by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random-phase unit-L² packet on the thickened cone described by `spec`.
pub fn cone_packet(spec: &ConePacketSpec, lat: &SpacetimeLattice) -> Result<SpacetimeField> {
    let (frame, mask) = spec.support(lat)?;
    random_phase_packet(*lat, frame, &mask, &mut ChaCha8Rng::seed_from_u64(spec.seed))
}

/// Power ascent for sup ‖u‖_{L⁴}/‖w·ũ‖_{L²} over fields supported on `mask`,
/// starting from `u0`. Returns the best ratio seen and the maximizer.
pub fn weighted_l4_ascent(u0: &SpacetimeField, mask: &[bool], weights: &[f64], iters: usize) -> (f64, SpacetimeField) {
    let lat = u0.lattice;
    let vol = lat.volume();
    let pt = PaddedTransform::new(&lat);
    let big_len = pt.big_len() as f64;
    let mut u = u0.clone();
    let mut best = (0.0, u.clone());
    for it in 0..=iters {
        let f = pt.to_samples(&u.coeffs);
        let s4: f64 = f.iter().map(|z| z.norm_sqr().powi(2)).sum();
        let l4 = (s4 * vol / big_len).powf(0.25);
        let den: f64 = u.coeffs.iter().zip(weights).map(|(c, w)| c.norm_sqr() * w * w).sum::<f64>() * vol;
        let r = l4 / den.sqrt();
        if r > best.0 {
            best = (r, u.clone());
        }
        if it == iters {
            break;
        }
        // gradient of ‖u‖⁴_{L⁴} is the projection of |u|²u; precondition by w⁻²
        let g: Vec<Complex64> = f.into_iter().map(|z| z * z.norm_sqr()).collect();
        let mut c = pt.to_coeffs(g);
        for ((z, &m), w) in c.iter_mut().zip(mask).zip(weights) {
            *z = if m { *z / (w * w) } else { ZERO };
        }
        let nrm: f64 = c.iter().zip(weights).map(|(z, w)| z.norm_sqr() * w * w).sum::<f64>().sqrt();
        if !(nrm > 0.0 && nrm.is_finite()) {
            break;
        }
        c.iter_mut().for_each(|z| *z /= nrm);
        u.coeffs = c;
    }
    best
}
