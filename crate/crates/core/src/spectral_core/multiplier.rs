use num_complex::Complex64;
use std::f64::consts::PI;

use super::field::{Field, Representation};
use super::grid::Grid2D;
use crate::error::{Error, Result};

/// A Fourier multiplier tabulated on a grid.
///
/// Symbols that are singular at the origin never get evaluated there: the
/// zero mode takes `zero_mode_value` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSpec {
    grid: Grid2D,
    zero_mode_value: Complex64,
    values: Vec<Complex64>,
}

impl MultiplierSpec {
    pub fn new(grid: Grid2D, symbol: impl Fn([f64; 2]) -> Complex64, zero_mode_value: Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        values.push(zero_mode_value);
        for idx in 1..grid.len() {
            values.push(symbol(grid.xi(idx)));
        }
        if let Some((idx, v)) = values.iter().enumerate().find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("symbol value {v} at ξ = {:?}", grid.xi(idx))));
        }
        Ok(Self { grid, zero_mode_value, values })
    }

    /// Real symbol of |ξ| alone.
    pub fn radial(grid: Grid2D, symbol: impl Fn(f64) -> f64, zero_mode_value: f64) -> Result<Self> {
        Self::new(grid, |xi| Complex64::new(symbol(xi[0].hypot(xi[1])), 0.0), Complex64::new(zero_mode_value, 0.0))
    }

    pub fn identity(grid: Grid2D) -> Self {
        Self::radial(grid, |_| 1.0, 1.0).expect("finite")
    }

    /// |ξ|, i.e. |∇|.
    pub fn abs_grad(grid: Grid2D) -> Self {
        Self::radial(grid, |r| r, 0.0).expect("finite")
    }

    /// ⟨ξ⟩^s.
    pub fn bessel(grid: Grid2D, s: f64) -> Result<Self> {
        Self::radial(grid, |r| (1.0 + r * r).powf(0.5 * s), 1.0)
    }

    /// |ξ|^s with an explicit zero-mode value.
    pub fn riesz(grid: Grid2D, s: f64, zero_mode_value: f64) -> Result<Self> {
        Self::radial(grid, |r| r.powf(s), zero_mode_value)
    }

    /// Transform of |x|⁻¹ on ℝ², 2π/|ξ|, with mean-zero convention.
    pub fn coulomb(grid: Grid2D) -> Self {
        Self::radial(grid, |r| 2.0 * PI / r, 0.0).expect("finite")
    }

    /// e^{−i·sign·t|ξ|}.
    pub fn half_wave(grid: Grid2D, t: f64, sign: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::invalid("t", format!("time must be finite, got {t}")));
        }
        Self::new(grid, |xi| Complex64::from_polar(1.0, -sign * t * xi[0].hypot(xi[1])), Complex64::new(1.0, 0.0))
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn zero_mode_value(&self) -> Complex64 {
        self.zero_mode_value
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Pointwise product of two symbols.
    pub fn compose(&self, other: &MultiplierSpec) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            zero_mode_value: self.zero_mode_value * other.zero_mode_value,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Multiply every Fourier mode of `f` by the symbol; the output keeps the
/// input's representation.
pub fn apply_multiplier<const C: usize>(f: &Field<C>, m: &MultiplierSpec) -> Result<Field<C>> {
    f.grid().ensure_same(&m.grid)?;
    let repr = f.repr();
    let mut out = f.in_frequency();
    for v in out.components_mut().iter_mut() {
        for (z, s) in v.iter_mut().zip(&m.values) {
            *z *= s;
        }
    }
    out.to_repr(repr);
    Ok(out)
}

/// In-place variant for frequency-space data.
pub(crate) fn apply_in_frequency<const C: usize>(f: &mut Field<C>, m: &MultiplierSpec) {
    debug_assert_eq!(f.repr(), Representation::Frequency);
    for v in f.components_mut().iter_mut() {
        for (z, s) in v.iter_mut().zip(&m.values) {
            *z *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::field::SpinorField;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_symbol_is_identity() {
        let g = Grid2D::new(16, 4.0).unwrap();
        let f = SpinorField::random_band_limited(g, 1, 7, |_| 1.0).in_physical();
        let out = apply_multiplier(&f, &MultiplierSpec::identity(g)).unwrap();
        assert!(out.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
        assert_eq!(out.repr(), Representation::Physical);
    }

    #[test]
    fn plane_wave_is_an_eigenfunction_of_abs_grad() {
        let g = Grid2D::new(16, 2.0).unwrap();
        let f = SpinorField::plane_wave(g, [2, 3], [c(1.0), c(-0.5)]);
        let out = apply_multiplier(&f, &MultiplierSpec::abs_grad(g)).unwrap();
        let k = g.dk() * 13f64.sqrt();
        let want = f.scaled(c(k));
        assert!(out.sub(&want).unwrap().l2_norm() <= 1e-11 * want.l2_norm());
    }

    #[test]
    fn bessel_powers_compose_to_identity() {
        let g = Grid2D::new(32, 1.0).unwrap();
        for s in [-1.5, 0.3, 2.0] {
            let a = MultiplierSpec::bessel(g, s).unwrap();
            let b = MultiplierSpec::bessel(g, -s).unwrap();
            let prod = a.compose(&b).unwrap();
            assert!(prod.values().iter().all(|v| (v - c(1.0)).norm() < 1e-10));
            let f = SpinorField::random_band_limited(g, 3, 15, |_| 1.0);
            let out = apply_multiplier(&apply_multiplier(&f, &a).unwrap(), &b).unwrap();
            assert!(out.sub(&f).unwrap().l2_norm() <= 1e-10 * f.l2_norm());
        }
    }

    #[test]
    fn singular_symbol_needs_finite_values() {
        let g = Grid2D::new(8, 1.0).unwrap();
        assert!(MultiplierSpec::radial(g, |r| 1.0 / r, f64::INFINITY).is_err());
        assert!(MultiplierSpec::radial(g, |r| 1.0 / r, 0.0).is_ok());
        assert!(MultiplierSpec::half_wave(g, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g = Grid2D::new(8, 1.0).unwrap();
        let h = Grid2D::new(16, 1.0).unwrap();
        let f = SpinorField::zeros(g, Representation::Frequency);
        assert!(apply_multiplier(&f, &MultiplierSpec::identity(h)).is_err());
    }
}
