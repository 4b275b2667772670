//! Cubic nonlinearities: the diagonal honeycomb power term N₁ and the
//! Hartree term N₂ = (|x|⁻¹ ∗ ψ₁†ψ₂).
//!
//! Products are formed in physical space. Inputs are 2/3-dealiased first and
//! the result is dealiased again.

use num_complex::Complex64;

use crate::error::Result;
use crate::spectral_core::field::{Representation, ScalarField, SpinorField};
use crate::spectral_core::multiplier::{apply_in_frequency, MultiplierSpec};
use crate::spectral_core::{DiracParams, NonlinearitySelector};

fn dealiased_physical(f: &SpinorField) -> SpinorField {
    let mut g = f.in_frequency();
    g.dealias();
    g.to_physical();
    g
}

/// Diagonal entries of N₁(ψ₁, ψ₂) at every grid point (physical space, no
/// filtering applied).
pub fn power_coefficients(psi1: &SpinorField, psi2: &SpinorField, p: &DiracParams) -> [Vec<Complex64>; 2] {
    let (a, b) = (psi1.components(), psi2.components());
    let len = psi1.grid().len();
    let mut d = [Vec::with_capacity(len), Vec::with_capacity(len)];
    for i in 0..len {
        let m1 = a[0][i] * b[0][i].conj();
        let m2 = a[1][i] * b[1][i].conj();
        d[0].push(p.b1 * m1 + 2.0 * p.b2 * m2);
        d[1].push(p.b1 * m2 + 2.0 * p.b2 * m1);
    }
    d
}

/// N₁(ψ₁, ψ₂)ψ₃.
pub fn apply_power_nonlinearity(psi1: &SpinorField, psi2: &SpinorField, psi3: &SpinorField, p: &DiracParams) -> Result<SpinorField> {
    psi1.grid().ensure_same(psi2.grid())?;
    psi1.grid().ensure_same(psi3.grid())?;
    let (a, b, c) = (dealiased_physical(psi1), dealiased_physical(psi2), dealiased_physical(psi3));
    let d = power_coefficients(&a, &b, p);
    let mut out = c;
    for k in 0..2 {
        for (z, w) in out.component_mut(k).iter_mut().zip(&d[k]) {
            *z *= w;
        }
    }
    out.dealias();
    Ok(out)
}

/// |x|⁻¹ ∗ (ψ₁†ψ₂), computed with the symbol 2π/|ξ| and a vanishing mean.
pub fn hartree_potential(psi1: &SpinorField, psi2: &SpinorField) -> Result<ScalarField> {
    psi1.grid().ensure_same(psi2.grid())?;
    Ok(potential_of_filtered(&dealiased_physical(psi1), &dealiased_physical(psi2)))
}

fn potential_of_filtered(a: &SpinorField, b: &SpinorField) -> ScalarField {
    let grid = *a.grid();
    let rho: Vec<Complex64> = (0..grid.len())
        .map(|i| a.component(0)[i].conj() * b.component(0)[i] + a.component(1)[i].conj() * b.component(1)[i])
        .collect();
    let mut v = ScalarField::from_values(grid, Representation::Physical, rho).expect("grid");
    v.to_frequency();
    apply_in_frequency(&mut v, &MultiplierSpec::coulomb(grid));
    v.dealias();
    v.to_physical();
    v
}

/// N₂(ψ₁, ψ₂)ψ₃.
pub fn apply_hartree_nonlinearity(psi1: &SpinorField, psi2: &SpinorField, psi3: &SpinorField) -> Result<SpinorField> {
    psi1.grid().ensure_same(psi3.grid())?;
    let v = hartree_potential(psi1, psi2)?;
    let mut out = dealiased_physical(psi3);
    for k in 0..2 {
        for (z, w) in out.component_mut(k).iter_mut().zip(v.values()) {
            *z *= w;
        }
    }
    out.dealias();
    Ok(out)
}

/// N_ℓ(ψ₁, ψ₂)ψ₃ for the selector in `p`.
pub fn apply_nonlinearity(psi1: &SpinorField, psi2: &SpinorField, psi3: &SpinorField, p: &DiracParams) -> Result<SpinorField> {
    match p.ell {
        NonlinearitySelector::Power => apply_power_nonlinearity(psi1, psi2, psi3, p),
        NonlinearitySelector::Hartree => apply_hartree_nonlinearity(psi1, psi2, psi3),
    }
}

/// Diagonal of N_ℓ(ψ, ψ) sampled in physical space, from a dealiased ψ and
/// with the result itself dealiased. Both entries are real up to rounding.
pub fn self_coefficients(psi: &SpinorField, p: &DiracParams) -> [Vec<Complex64>; 2] {
    let a = dealiased_physical(psi);
    let grid = *a.grid();
    match p.ell {
        NonlinearitySelector::Power => {
            // |ψ₁|² and |ψ₂|² are real, so one complex transform filters both
            let packed: Vec<Complex64> = (0..grid.len())
                .map(|i| Complex64::new(a.component(0)[i].norm_sqr(), a.component(1)[i].norm_sqr()))
                .collect();
            let mut m = ScalarField::from_values(grid, Representation::Physical, packed).expect("grid");
            m.dealias();
            let mut d = [Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
            for z in m.values() {
                let (m1, m2) = (z.re, z.im);
                d[0].push(Complex64::new(p.b1 * m1 + 2.0 * p.b2 * m2, 0.0));
                d[1].push(Complex64::new(p.b1 * m2 + 2.0 * p.b2 * m1, 0.0));
            }
            d
        }
        NonlinearitySelector::Hartree => {
            let [v] = potential_of_filtered(&a, &a).into_components();
            [v.clone(), v]
        }
    }
}

/// ∫ ψ† N_ℓ(ψ, ψ) ψ dx.
pub fn interaction_energy(psi: &SpinorField, p: &DiracParams) -> Result<Complex64> {
    let n = apply_nonlinearity(psi, psi, psi, p)?;
    psi.inner(&n)
}
