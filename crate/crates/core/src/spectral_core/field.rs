use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fft;
use super::grid::Grid2D;
use crate::error::{Error, Result};

/// Which space the stored samples live in.
///
/// Frequency samples approximate the continuum transform:
/// `f̂(ξ) = dx² Σ f(x) e^{−ix·ξ}` and `f(x) = L⁻² Σ f̂(ξ) e^{ix·ξ}`,
/// so `‖f‖²_{L²} = L⁻² Σ |f̂|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Physical,
    Frequency,
}

impl Representation {
    pub fn tag(self) -> u8 {
        match self {
            Representation::Physical => 0,
            Representation::Frequency => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Representation::Physical),
            1 => Some(Representation::Frequency),
            _ => None,
        }
    }
}

/// `C` complex scalar fields sharing one grid and one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<const C: usize> {
    grid: Grid2D,
    repr: Representation,
    comps: [Vec<Complex64>; C],
}

pub type ScalarField = Field<1>;
pub type SpinorField = Field<2>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl<const C: usize> Field<C> {
    pub fn zeros(grid: Grid2D, repr: Representation) -> Self {
        Self { grid, repr, comps: std::array::from_fn(|_| vec![ZERO; grid.len()]) }
    }

    pub fn from_components(grid: Grid2D, repr: Representation, comps: [Vec<Complex64>; C]) -> Result<Self> {
        for (c, v) in comps.iter().enumerate() {
            if v.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component {c} has {} samples, grid has {}",
                    v.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self { grid, repr, comps })
    }

    /// Build from a physical-space function of position.
    pub fn from_fn(grid: Grid2D, f: impl Fn([f64; 2]) -> [Complex64; C]) -> Self {
        let mut out = Self::zeros(grid, Representation::Physical);
        for idx in 0..grid.len() {
            let v = f(grid.position(idx));
            for c in 0..C {
                out.comps[c][idx] = v[c];
            }
        }
        out
    }

    /// Build from a function of the frequency vector.
    pub fn from_spectrum(grid: Grid2D, f: impl Fn([f64; 2]) -> [Complex64; C]) -> Self {
        let mut out = Self::zeros(grid, Representation::Frequency);
        for idx in 0..grid.len() {
            let v = f(grid.xi(idx));
            for c in 0..C {
                out.comps[c][idx] = v[c];
            }
        }
        out
    }

    /// Random band-limited field: independent Gaussian-like coefficients
    /// on modes with |k|∞ ≤ `kmax` (in lattice units), weighted by `weight(ξ)`.
    pub fn random_band_limited(grid: Grid2D, seed: u64, kmax: i64, weight: impl Fn([f64; 2]) -> f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Self::zeros(grid, Representation::Frequency);
        let n = grid.n();
        for i in 0..n {
            for j in 0..n {
                let idx = grid.index(i, j);
                // draw for every mode so the stream layout does not depend on kmax
                let draws: [Complex64; C] = std::array::from_fn(|_| {
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                if grid.wavenumber(i).abs() <= kmax && grid.wavenumber(j).abs() <= kmax {
                    let w = weight(grid.xi(idx));
                    for c in 0..C {
                        out.comps[c][idx] = draws[c] * w;
                    }
                }
            }
        }
        out
    }

    /// Smooth random field with a Gaussian spectral envelope of width
    /// `width` (frequency units), supported inside the 2/3 band and
    /// normalized to L² norm `norm`.
    pub fn smooth_random(grid: Grid2D, seed: u64, width: f64, norm: f64) -> Self {
        let kmax = (grid.n() / 3) as i64;
        let mut f = Self::random_band_limited(grid, seed, kmax, |xi| (-(xi[0] * xi[0] + xi[1] * xi[1]) / (2.0 * width * width)).exp());
        let n0 = f.l2_norm();
        if n0 > 0.0 {
            f.scale(Complex64::new(norm / n0, 0.0));
        }
        f
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>; C] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>; C] {
        &mut self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; C] {
        self.comps
    }

    pub fn to_frequency(&mut self) {
        if self.repr == Representation::Frequency {
            return;
        }
        let n = self.grid.n();
        let s = self.grid.cell_area();
        for v in self.comps.iter_mut() {
            fft::fft2(v, n, false);
            v.iter_mut().for_each(|z| *z *= s);
        }
        self.repr = Representation::Frequency;
    }

    pub fn to_physical(&mut self) {
        if self.repr == Representation::Physical {
            return;
        }
        let n = self.grid.n();
        let s = 1.0 / (self.grid.box_length() * self.grid.box_length());
        for v in self.comps.iter_mut() {
            fft::fft2(v, n, true);
            v.iter_mut().for_each(|z| *z *= s);
        }
        self.repr = Representation::Physical;
    }

    pub fn to_repr(&mut self, repr: Representation) {
        match repr {
            Representation::Physical => self.to_physical(),
            Representation::Frequency => self.to_frequency(),
        }
    }

    pub fn in_frequency(&self) -> Self {
        let mut f = self.clone();
        f.to_frequency();
        f
    }

    pub fn in_physical(&self) -> Self {
        let mut f = self.clone();
        f.to_physical();
        f
    }

    /// Copy of `other` expressed in this field's representation.
    fn aligned<'a>(&self, other: &'a Self) -> Result<std::borrow::Cow<'a, Self>> {
        self.grid.ensure_same(&other.grid)?;
        if other.repr == self.repr {
            Ok(std::borrow::Cow::Borrowed(other))
        } else {
            let mut o = other.clone();
            o.to_repr(self.repr);
            Ok(std::borrow::Cow::Owned(o))
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: Complex64, other: &Self) -> Result<()> {
        let other = self.aligned(other)?;
        for c in 0..C {
            for (x, y) in self.comps[c].iter_mut().zip(&other.comps[c]) {
                *x += a * y;
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn scale(&mut self, a: Complex64) {
        self.comps.iter_mut().flatten().for_each(|z| *z *= a);
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// L² norm over the torus.
    pub fn l2_norm(&self) -> f64 {
        let ss: f64 = self.comps.iter().flatten().map(|z| z.norm_sqr()).sum();
        match self.repr {
            Representation::Physical => (ss * self.grid.cell_area()).sqrt(),
            Representation::Frequency => ss.sqrt() / self.grid.box_length(),
        }
    }

    /// ∫ selfᴴ other dx.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        let other = self.aligned(other)?;
        let mut acc = ZERO;
        for c in 0..C {
            for (x, y) in self.comps[c].iter().zip(&other.comps[c]) {
                acc += x.conj() * y;
            }
        }
        Ok(match self.repr {
            Representation::Physical => acc * self.grid.cell_area(),
            Representation::Frequency => acc / (self.grid.box_length() * self.grid.box_length()),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Set every Fourier mode outside the 2/3 band to zero.
    pub fn dealias(&mut self) {
        let repr = self.repr;
        self.to_frequency();
        let grid = self.grid;
        for v in self.comps.iter_mut() {
            for (idx, z) in v.iter_mut().enumerate() {
                if !grid.dealias_keep(idx) {
                    *z = ZERO;
                }
            }
        }
        self.to_repr(repr);
    }

    /// Same samples reinterpreted on another grid with the same `n`.
    pub fn relabel_grid(self, grid: Grid2D) -> Result<Self> {
        if grid.n() != self.grid.n() {
            return Err(Error::GridMismatch(format!("cannot relabel n={} as n={}", self.grid.n(), grid.n())));
        }
        Ok(Self { grid, repr: self.repr, comps: self.comps })
    }
}

impl SpinorField {
    /// Plane wave `e^{ix·ξ}·v` with ξ = dk·k.
    pub fn plane_wave(grid: Grid2D, k: [i64; 2], v: [Complex64; 2]) -> Self {
        let dk = grid.dk();
        Self::from_fn(grid, |x| {
            let ph = Complex64::from_polar(1.0, dk * (k[0] as f64 * x[0] + k[1] as f64 * x[1]));
            [v[0] * ph, v[1] * ph]
        })
    }
}

impl ScalarField {
    pub fn values(&self) -> &[Complex64] {
        &self.comps[0]
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.comps[0]
    }

    pub fn from_values(grid: Grid2D, repr: Representation, v: Vec<Complex64>) -> Result<Self> {
        Self::from_components(grid, repr, [v])
    }
}
