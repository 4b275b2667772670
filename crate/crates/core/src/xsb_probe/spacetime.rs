//! Space-time lattices, spectral frames and exact padded transforms.
//!
//! A [`SpacetimeField`] stores coefficients `c(kτ, k₁, k₂)` of a
//! trigonometric polynomial on the box `[0, T) × [0, Lₓ)²`, with
//! `T = 2π/dτ` and `Lₓ = 2π/dk`. The [`SpectralFrame`] maps lattice
//! frequencies to true ones:
//!
//! * `ξ = dk·k + xi_offset`
//! * `τ = dτ·kτ + tau_offset + shear·(dk·k)`
//!
//! In physical terms `u(t, x) = e^{i(τ₀t + ξ₀·x)} v(t, x + t·shear)` where
//! `v` has the lattice frequencies, so `|u|` is a sheared copy of `|v|` and
//! every Lᵖ norm over the box is computed from `v` alone.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par;
use crate::spectral_core::fft;
use crate::spectral_core::grid::Grid2D;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Periodic (t, x) lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeLattice {
    pub grid: Grid2D,
    pub nt: usize,
    pub t_period: f64,
}

impl SpacetimeLattice {
    pub fn new(grid: Grid2D, nt: usize, t_period: f64) -> Result<Self> {
        if nt < 4 || nt % 2 != 0 || !nt.is_power_of_two() {
            return Err(Error::invalid("nt", format!("need an even power of two >= 4, got {nt}")));
        }
        if !(t_period.is_finite() && t_period > 0.0) {
            return Err(Error::invalid("t_period", format!("need a positive period, got {t_period}")));
        }
        Ok(Self { grid, nt, t_period })
    }

    /// Lattice with spacings dτ and dk.
    pub fn with_spacings(n: usize, nt: usize, dk: f64, dtau: f64) -> Result<Self> {
        if !(dtau.is_finite() && dtau > 0.0) {
            return Err(Error::invalid("dtau", format!("need a positive spacing, got {dtau}")));
        }
        Self::new(Grid2D::with_spacing(n, dk)?, nt, 2.0 * PI / dtau)
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn len(&self) -> usize {
        self.nt * self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dk(&self) -> f64 {
        self.grid.dk()
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / self.t_period
    }

    /// Volume T·Lₓ² of the fundamental box.
    pub fn volume(&self) -> f64 {
        self.t_period * self.grid.box_length() * self.grid.box_length()
    }

    /// Signed lattice indices (kτ, k₁, k₂) of a flat index.
    pub fn wavenumbers(&self, idx: usize) -> [i64; 3] {
        let n2 = self.grid.len();
        let it = idx / n2;
        let r = idx % n2;
        let kt = {
            let (i, nt) = (it as i64, self.nt as i64);
            if i < nt / 2 {
                i
            } else {
                i - nt
            }
        };
        [kt, self.grid.wavenumber(r / self.n()), self.grid.wavenumber(r % self.n())]
    }
}

/// Offsets mapping lattice frequencies to true (τ, ξ).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralFrame {
    pub tau_offset: f64,
    pub xi_offset: [f64; 2],
    pub shear: [f64; 2],
}

impl SpectralFrame {
    /// True (τ, ξ) from lattice indices.
    pub fn true_frequency(&self, lat: &SpacetimeLattice, k: [i64; 3]) -> (f64, [f64; 2]) {
        let (dk, dtau) = (lat.dk(), lat.dtau());
        let xl = [k[1] as f64 * dk, k[2] as f64 * dk];
        let tau = k[0] as f64 * dtau + self.tau_offset + self.shear[0] * xl[0] + self.shear[1] * xl[1];
        (tau, [xl[0] + self.xi_offset[0], xl[1] + self.xi_offset[1]])
    }
}

/// Complex field on a space-time lattice, stored by its coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeField {
    pub lattice: SpacetimeLattice,
    pub frame: SpectralFrame,
    pub coeffs: Vec<Complex64>,
}

impl SpacetimeField {
    pub fn zeros(lattice: SpacetimeLattice, frame: SpectralFrame) -> Self {
        Self { lattice, frame, coeffs: vec![ZERO; lattice.len()] }
    }

    /// Field from samples `v(t_a, x_b)` on the lattice's (nt, n, n) sample
    /// grid (frame applied on top of the sampled function).
    pub fn from_samples(lattice: SpacetimeLattice, frame: SpectralFrame, mut samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != lattice.len() {
            return Err(Error::GridMismatch(format!("{} samples for a lattice of {}", samples.len(), lattice.len())));
        }
        let n = lattice.n();
        fft3(&mut samples, [lattice.nt, n, n], false);
        let s = 1.0 / lattice.len() as f64;
        samples.iter_mut().for_each(|z| *z *= s);
        Ok(Self { lattice, frame, coeffs: samples })
    }

    /// Samples `v(t_a, x_b)` of the unframed polynomial on the (nt, n, n) grid.
    pub fn samples(&self) -> Vec<Complex64> {
        let n = self.lattice.n();
        let mut v = self.coeffs.clone();
        fft3(&mut v, [self.lattice.nt, n, n], true);
        v
    }

    pub fn true_frequency(&self, idx: usize) -> (f64, [f64; 2]) {
        self.frame.true_frequency(&self.lattice, self.lattice.wavenumbers(idx))
    }

    /// Space-time L² norm over the fundamental box.
    pub fn l2_norm(&self) -> f64 {
        let ss: f64 = self.coeffs.iter().map(|z| z.norm_sqr()).sum();
        (ss * self.lattice.volume()).sqrt()
    }

    /// Exact space-time L⁴ norm (the padded grid integrates |u|⁴ exactly).
    pub fn l4_norm(&self) -> f64 {
        let pt = PaddedTransform::new(&self.lattice);
        pt.l4_norm(&self.coeffs, self.lattice.volume())
    }

    /// u(−t, −x): indices k ↦ −k−1 and offsets adjusted so that the true
    /// frequencies are exactly negated.
    pub fn reflected(&self) -> Self {
        let lat = self.lattice;
        let (n, nt) = (lat.n(), lat.nt);
        let (dk, dtau) = (lat.dk(), lat.dtau());
        let mut out = Self::zeros(lat, self.frame);
        let refl = |k: i64, m: usize| -> usize { (-k - 1).rem_euclid(m as i64) as usize };
        for idx in 0..lat.len() {
            let [kt, k1, k2] = lat.wavenumbers(idx);
            let j = refl(kt, nt) * n * n + refl(k1, n) * n + refl(k2, n);
            out.coeffs[j] = self.coeffs[idx];
        }
        let f = self.frame;
        out.frame = SpectralFrame {
            tau_offset: dtau - f.tau_offset + dk * (f.shear[0] + f.shear[1]),
            xi_offset: [dk - f.xi_offset[0], dk - f.xi_offset[1]],
            shear: f.shear,
        };
        out
    }

    pub fn scale(&mut self, a: Complex64) {
        self.coeffs.iter_mut().for_each(|z| *z *= a);
    }
}

/// Unnormalized 3D transform of a (d0, d1, d2) row-major array.
pub fn fft3(data: &mut [Complex64], dims: [usize; 3], inverse: bool) {
    let [d0, d1, d2] = dims;
    fft::fft_rows(data, d2, inverse);
    let slab = d1 * d2;
    let fft1 = fft::plan(d1, inverse);
    par::for_chunks(data, slab, |_, s| leading_axis_serial(s, d1, d2, &*fft1));
    fft::fft_leading_axis(data, d0, slab, inverse);
}

fn leading_axis_serial(data: &mut [Complex64], d0: usize, rest: usize, f: &dyn rustfft::Fft<f64>) {
    let mut buf = vec![ZERO; d0 * rest];
    for r in 0..d0 {
        for c in 0..rest {
            buf[c * d0 + r] = data[r * rest + c];
        }
    }
    let mut scratch = vec![ZERO; f.get_inplace_scratch_len()];
    f.process_with_scratch(&mut buf, &mut scratch);
    for r in 0..d0 {
        for c in 0..rest {
            data[r * rest + c] = buf[c * d0 + r];
        }
    }
}

/// Transforms between a lattice's coefficients and samples on the doubled
/// (2nt, 2n, 2n) grid, skipping passes over rows known to vanish.
#[derive(Debug, Clone)]
pub struct PaddedTransform {
    nt: usize,
    n: usize,
    /// Position of each small-lattice index on the big lattice, per axis.
    tmap: Vec<usize>,
    xmap: Vec<usize>,
    tkeep: Vec<bool>,
    xkeep: Vec<bool>,
}

impl PaddedTransform {
    pub fn new(lat: &SpacetimeLattice) -> Self {
        let (nt, n) = (lat.nt, lat.n());
        let embed = |m: usize| -> Vec<usize> {
            (0..m)
                .map(|i| {
                    let k = if i < m / 2 { i as i64 } else { i as i64 - m as i64 };
                    k.rem_euclid(2 * m as i64) as usize
                })
                .collect()
        };
        let tmap = embed(nt);
        let xmap = embed(n);
        let mut tkeep = vec![false; 2 * nt];
        tmap.iter().for_each(|&i| tkeep[i] = true);
        let mut xkeep = vec![false; 2 * n];
        xmap.iter().for_each(|&i| xkeep[i] = true);
        Self { nt, n, tmap, xmap, tkeep, xkeep }
    }

    pub fn big_dims(&self) -> [usize; 3] {
        [2 * self.nt, 2 * self.n, 2 * self.n]
    }

    pub fn big_len(&self) -> usize {
        8 * self.nt * self.n * self.n
    }

    /// Signed big-lattice wavenumber of a big-lattice storage index.
    pub fn big_wavenumber(m: usize, i: usize) -> i64 {
        if i < m / 2 {
            i as i64
        } else {
            i as i64 - m as i64
        }
    }

    /// Samples of the polynomial with coefficients `c` on the doubled grid
    /// (no normalization: `f = Σ c e^{i…}`).
    pub fn to_samples(&self, c: &[Complex64]) -> Vec<Complex64> {
        let [b0, b1, b2] = self.big_dims();
        let (n, nt) = (self.n, self.nt);
        let mut big = vec![ZERO; self.big_len()];
        for it in 0..nt {
            for i in 0..n {
                let src = &c[(it * n + i) * n..(it * n + i + 1) * n];
                let row = (self.tmap[it] * b1 + self.xmap[i]) * b2;
                for (j, z) in src.iter().enumerate() {
                    big[row + self.xmap[j]] = *z;
                }
            }
        }
        let f2 = fft::plan(b2, true);
        let f1 = fft::plan(b1, true);
        let (tkeep, xkeep) = (&self.tkeep, &self.xkeep);
        par::for_chunks(&mut big, b1 * b2, |a, slab| {
            if !tkeep[a] {
                return;
            }
            let mut scratch = vec![ZERO; f2.get_inplace_scratch_len()];
            for b in 0..b1 {
                if xkeep[b] {
                    f2.process_with_scratch(&mut slab[b * b2..(b + 1) * b2], &mut scratch);
                }
            }
            leading_axis_serial(slab, b1, b2, &*f1);
        });
        fft::fft_leading_axis(&mut big, b0, b1 * b2, true);
        big
    }

    /// Small-lattice coefficients of the trigonometric interpolant of
    /// doubled-grid samples, truncated to the small lattice.
    pub fn to_coeffs(&self, mut big: Vec<Complex64>) -> Vec<Complex64> {
        let [b0, b1, b2] = self.big_dims();
        let (n, nt) = (self.n, self.nt);
        fft::fft_leading_axis(&mut big, b0, b1 * b2, false);
        let f2 = fft::plan(b2, false);
        let f1 = fft::plan(b1, false);
        let (tkeep, xkeep) = (&self.tkeep, &self.xkeep);
        par::for_chunks(&mut big, b1 * b2, |a, slab| {
            if !tkeep[a] {
                return;
            }
            leading_axis_serial(slab, b1, b2, &*f1);
            let mut scratch = vec![ZERO; f2.get_inplace_scratch_len()];
            for b in 0..b1 {
                if xkeep[b] {
                    f2.process_with_scratch(&mut slab[b * b2..(b + 1) * b2], &mut scratch);
                }
            }
        });
        let s = 1.0 / self.big_len() as f64;
        let mut c = vec![ZERO; nt * n * n];
        for it in 0..nt {
            for i in 0..n {
                let row = (self.tmap[it] * b1 + self.xmap[i]) * b2;
                let dst = &mut c[(it * n + i) * n..(it * n + i + 1) * n];
                for (j, z) in dst.iter_mut().enumerate() {
                    *z = big[row + self.xmap[j]] * s;
                }
            }
        }
        c
    }

    /// Exact L⁴ norm of the polynomial with coefficients `c` over a box of
    /// volume `vol`.
    pub fn l4_norm(&self, c: &[Complex64], vol: f64) -> f64 {
        let f = self.to_samples(c);
        let s4: f64 = f.iter().map(|z| z.norm_sqr().powi(2)).sum();
        (s4 * vol / self.big_len() as f64).powf(0.25)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(n: usize, nt: usize) -> SpacetimeLattice {
        SpacetimeLattice::with_spacings(n, nt, 0.7, 1.3).unwrap()
    }

    fn random_coeffs(len: usize, seed: u64) -> Vec<Complex64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    }

    #[test]
    fn sample_round_trip() {
        let l = lat(8, 8);
        let u = SpacetimeField { lattice: l, frame: SpectralFrame::default(), coeffs: random_coeffs(l.len(), 1) };
        let back = SpacetimeField::from_samples(l, u.frame, u.samples()).unwrap();
        let err: f64 = back.coeffs.iter().zip(&u.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn padded_samples_agree_with_direct_evaluation() {
        let l = lat(4, 4);
        let c = random_coeffs(l.len(), 2);
        let pt = PaddedTransform::new(&l);
        let f = pt.to_samples(&c);
        let [b0, b1, b2] = pt.big_dims();
        for probe in [0usize, 17, 200, b0 * b1 * b2 - 1] {
            let (a, r) = (probe / (b1 * b2), probe % (b1 * b2));
            let (b, cc) = (r / b2, r % b2);
            let mut want = ZERO;
            for idx in 0..l.len() {
                let [kt, k1, k2] = l.wavenumbers(idx);
                let ph = 2.0 * PI * (kt as f64 * a as f64 / b0 as f64 + k1 as f64 * b as f64 / b1 as f64 + k2 as f64 * cc as f64 / b2 as f64);
                want += c[idx] * Complex64::from_polar(1.0, ph);
            }
            assert!((f[probe] - want).norm() < 1e-11);
        }
        let back = pt.to_coeffs(f);
        let err: f64 = back.iter().zip(&c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn l4_of_single_mode_is_the_volume_constant() {
        let l = lat(8, 8);
        let mut u = SpacetimeField::zeros(l, SpectralFrame::default());
        u.coeffs[3 * 64 + 9] = Complex64::new(0.0, 2.0);
        let want = 2.0 * l.volume().powf(0.25);
        assert!((u.l4_norm() - want).abs() < 1e-12 * want);
        assert!((u.l2_norm() - 2.0 * l.volume().sqrt()).abs() < 1e-12 * want);
    }

    #[test]
    fn l4_matches_fine_quadrature() {
        // |f|⁴ has twice the bandwidth; a 4× grid integrates it exactly too
        let l = lat(4, 4);
        let c = random_coeffs(l.len(), 3);
        let u = SpacetimeField { lattice: l, frame: SpectralFrame::default(), coeffs: c.clone() };
        let (nt, n) = (16usize, 16usize);
        let mut s4 = 0.0;
        for a in 0..nt {
            for b in 0..n {
                for cc in 0..n {
                    let mut v = ZERO;
                    for idx in 0..l.len() {
                        let [kt, k1, k2] = l.wavenumbers(idx);
                        let ph = 2.0 * PI * (kt as f64 * a as f64 / nt as f64 + (k1 as f64 * b as f64 + k2 as f64 * cc as f64) / n as f64);
                        v += c[idx] * Complex64::from_polar(1.0, ph);
                    }
                    s4 += v.norm_sqr().powi(2);
                }
            }
        }
        let want = (s4 * l.volume() / (nt * n * n) as f64).powf(0.25);
        assert!((u.l4_norm() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn reflection_negates_true_frequencies() {
        let l = lat(8, 8);
        let frame = SpectralFrame { tau_offset: 3.1, xi_offset: [5.0, -0.2], shear: [0.6, 0.8] };
        let mut u = SpacetimeField::zeros(l, frame);
        u.coeffs[100] = Complex64::new(1.0, 0.0);
        let r = u.reflected();
        let j = r.coeffs.iter().position(|z| z.norm() > 0.0).unwrap();
        let (t0, x0) = u.true_frequency(100);
        let (t1, x1) = r.true_frequency(j);
        assert!((t0 + t1).abs() < 1e-12 && (x0[0] + x1[0]).abs() < 1e-12 && (x0[1] + x1[1]).abs() < 1e-12);
    }
}
