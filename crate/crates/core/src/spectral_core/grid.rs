use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// N×N periodic grid on a square box of side `box_length`.
///
/// Fields are stored row-major, index `i * n + j` with `i` along x₁.
/// Frequencies use the usual FFT ordering; index `i` carries the signed
/// wavenumber `i` for `i < n/2` and `i - n` otherwise, so the lattice is
/// `(2π/L)·{−n/2, …, n/2−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n: usize,
    box_length: f64,
}

impl Grid2D {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid("n", format!("need an even n >= 4, got {n}")));
        }
        if !n.is_power_of_two() {
            return Err(Error::invalid("n", format!("need a power of two, got {n}")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::invalid("box_length", format!("need a finite positive length, got {box_length}")));
        }
        Ok(Self { n, box_length })
    }

    /// Grid whose frequency spacing is `dk`.
    pub fn with_spacing(n: usize, dk: f64) -> Result<Self> {
        if !(dk.is_finite() && dk > 0.0) {
            return Err(Error::invalid("dk", format!("need a finite positive spacing, got {dk}")));
        }
        Self::new(n, 2.0 * PI / dk)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency spacing 2π/L.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Physical spacing L/n.
    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Cell area dx².
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Signed wavenumber of storage index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index of the signed wavenumber `k`, if it is on the lattice.
    pub fn storage_index(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k < -n / 2 || k >= n / 2 {
            None
        } else {
            Some(k.rem_euclid(n) as usize)
        }
    }

    /// Physical frequency at storage index `i` along one axis.
    pub fn freq(&self, i: usize) -> f64 {
        self.wavenumber(i) as f64 * self.dk()
    }

    /// Frequency vector ξ of flat index `idx`.
    pub fn xi(&self, idx: usize) -> [f64; 2] {
        [self.freq(idx / self.n), self.freq(idx % self.n)]
    }

    pub fn abs_xi(&self, idx: usize) -> f64 {
        let [a, b] = self.xi(idx);
        a.hypot(b)
    }

    /// Physical position of flat index `idx`.
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let dx = self.dx();
        [(idx / self.n) as f64 * dx, (idx % self.n) as f64 * dx]
    }

    /// 2/3-rule mask: keep modes with both |kᵢ| ≤ n/3.
    pub fn dealias_keep(&self, idx: usize) -> bool {
        let cut = self.n as i64 / 3;
        let a = self.wavenumber(idx / self.n).abs();
        let b = self.wavenumber(idx % self.n).abs();
        a <= cut && b <= cut
    }

    /// Largest |ξ| representable along an axis.
    pub fn nyquist(&self) -> f64 {
        (self.n / 2) as f64 * self.dk()
    }

    pub fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "n={} L={} vs n={} L={}",
                self.n, self.box_length, other.n, other.box_length
            )))
        }
    }
}
