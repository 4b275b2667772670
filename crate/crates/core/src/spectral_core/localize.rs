use serde::{Deserialize, Serialize};

use super::field::Field;
use super::grid::Grid2D;
use crate::error::{Error, Result};

/// Relative slack so that boxes and balls with lattice-aligned edges keep
/// their boundary modes despite rounding.
const EDGE_SLACK: f64 = 1e-9;

/// Frequency regions used for sharp cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// |ξ| < mu.
    Low { mu: f64 },
    /// Dyadic shell mu ≤ |ξ| < 2·mu.
    Annulus { mu: f64 },
    /// Closed ball |ξ − center| ≤ radius.
    Ball { center: [f64; 2], radius: f64 },
    /// Closed box |ξᵢ − centerᵢ| ≤ half_widthsᵢ.
    Box { center: [f64; 2], half_widths: [f64; 2] },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let good = match *self {
            Region::Low { mu } | Region::Annulus { mu } => ok(mu),
            Region::Ball { center, radius } => ok(radius) && center.iter().all(|c| c.is_finite()),
            Region::Box { center, half_widths } => half_widths.iter().all(|&h| ok(h)) && center.iter().all(|c| c.is_finite()),
        };
        if good {
            Ok(())
        } else {
            Err(Error::invalid("region", format!("malformed region {self:?}")))
        }
    }

    pub fn contains(&self, xi: [f64; 2]) -> bool {
        match *self {
            Region::Low { mu } => xi[0].hypot(xi[1]) < mu,
            Region::Annulus { mu } => {
                let r = xi[0].hypot(xi[1]);
                r >= mu && r < 2.0 * mu
            }
            Region::Ball { center, radius } => {
                (xi[0] - center[0]).hypot(xi[1] - center[1]) <= radius * (1.0 + EDGE_SLACK)
            }
            Region::Box { center, half_widths } => (0..2).all(|i| (xi[i] - center[i]).abs() <= half_widths[i] * (1.0 + EDGE_SLACK)),
        }
    }

    pub fn mask(&self, grid: &Grid2D) -> Vec<bool> {
        (0..grid.len()).map(|i| self.contains(grid.xi(i))).collect()
    }

    /// Low part |ξ| < 1 followed by the shells [2ʲ, 2ʲ⁺¹) that reach the
    /// edge of the lattice; together they partition every mode.
    pub fn dyadic_partition(grid: &Grid2D) -> Vec<Region> {
        let rmax = (0..grid.len()).map(|i| grid.abs_xi(i)).fold(0.0, f64::max);
        let mut out = vec![Region::Low { mu: 1.0 }];
        let mut mu = 1.0;
        while mu <= rmax {
            out.push(Region::Annulus { mu });
            mu *= 2.0;
        }
        out
    }
}

/// Sharp Fourier cutoff to `region`. An empty region yields the zero field.
pub fn frequency_project<const C: usize>(f: &Field<C>, region: &Region) -> Result<Field<C>> {
    region.validate()?;
    let repr = f.repr();
    let mut g = f.in_frequency();
    let mask = region.mask(g.grid());
    for v in g.components_mut().iter_mut() {
        for (z, keep) in v.iter_mut().zip(&mask) {
            if !keep {
                *z = num_complex::Complex64::new(0.0, 0.0);
            }
        }
    }
    g.to_repr(repr);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::field::SpinorField;

    #[test]
    fn dyadic_shells_sum_to_identity() {
        let g = Grid2D::new(32, 3.0).unwrap();
        let f = SpinorField::random_band_limited(g, 4, 16, |_| 1.0).in_physical();
        let mut acc = f.scaled(num_complex::Complex64::new(0.0, 0.0));
        for r in Region::dyadic_partition(&g) {
            acc.axpy(num_complex::Complex64::new(1.0, 0.0), &frequency_project(&f, &r).unwrap()).unwrap();
        }
        assert!(acc.sub(&f).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn projection_is_idempotent_and_fixes_its_support() {
        let g = Grid2D::new(32, 6.0).unwrap();
        let f = SpinorField::random_band_limited(g, 5, 16, |_| 1.0);
        for r in [
            Region::Annulus { mu: 4.0 },
            Region::Ball { center: [3.0, -1.0], radius: 5.0 },
            Region::Box { center: [4.0, 0.0], half_widths: [3.0, 2.0] },
        ] {
            let once = frequency_project(&f, &r).unwrap();
            let twice = frequency_project(&once, &r).unwrap();
            assert!(twice.sub(&once).unwrap().l2_norm() <= 1e-14 * f.l2_norm());
            assert!(once.l2_norm() > 0.0);
        }
    }

    #[test]
    fn empty_region_gives_zero_and_bad_region_errors() {
        let g = Grid2D::new(16, 6.0).unwrap();
        let f = SpinorField::random_band_limited(g, 5, 8, |_| 1.0);
        let z = frequency_project(&f, &Region::Ball { center: [1e6, 0.0], radius: 1.0 }).unwrap();
        assert_eq!(z.l2_norm(), 0.0);
        assert!(frequency_project(&f, &Region::Low { mu: f64::NAN }).is_err());
    }
}
