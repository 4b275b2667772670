use num_complex::Complex64;
use proptest::prelude::*;

use dirac_core::evolution::{
    evolve, evolve_to, picard_iterate, scaling_covariance_check, split_initial_data, step_strang, PicardConfig,
};
use dirac_core::nonlinearity::interaction_energy;
use dirac_core::spectral_core::{sobolev_norm, CouplingForm, DiracParams, Grid2D, NonlinearitySelector, SpinorField};

const ELLS: [NonlinearitySelector; 2] = [NonlinearitySelector::Power, NonlinearitySelector::Hartree];

fn torus(n: usize) -> Grid2D {
    Grid2D::new(n, 2.0 * std::f64::consts::PI).unwrap()
}

fn rel(a: &SpinorField, b: &SpinorField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn charge_is_conserved(seed in any::<u64>(), kappa in 0.1f64..3.0, two in any::<bool>()) {
        let p = DiracParams::default().with_kappa(kappa).with_ell(ELLS[two as usize]);
        let s0 = split_initial_data(&SpinorField::smooth_random(torus(32), seed, 2.0, 1.0), &p);
        let (_, rows) = evolve(&s0, 0.01, 40, &p, &[], 5).unwrap();
        let q0 = rows[0].charge;
        for r in &rows {
            prop_assert!((r.charge - q0).abs() <= 1e-10 * q0);
        }
    }

    #[test]
    fn free_flow_is_reversible(seed in any::<u64>(), t in 0.1f64..5.0) {
        let p = DiracParams::default().with_kappa(0.0);
        let psi0 = SpinorField::smooth_random(torus(32), seed, 3.0, 1.0);
        let fwd = evolve_to(&split_initial_data(&psi0, &p), t, 0.1, &p).unwrap();
        let mut back = fwd.clone();
        back.time = 0.0;
        // backward flow is the forward flow with the cone signs swapped
        std::mem::swap(&mut back.psi_plus, &mut back.psi_minus);
        let back = evolve_to(&back, t, 0.1, &p).unwrap();
        let back = dirac_core::evolution::SplitState { psi_plus: back.psi_minus, psi_minus: back.psi_plus, time: 0.0 };
        prop_assert!(rel(&back.psi(), &psi0.in_frequency()) <= 1e-12);
    }
}

#[test]
fn literal_coupling_drains_charge_at_the_interaction_rate() {
    for ell in ELLS {
        let p = DiracParams::default().with_ell(ell).with_coupling_form(CouplingForm::Literal).with_kappa(0.7);
        let psi0 = SpinorField::smooth_random(torus(32), 3, 2.0, 1.0);
        let s0 = split_initial_data(&psi0, &p);
        let dt = 1e-4;
        let q = |s: &dirac_core::evolution::SplitState| s.charge();
        let fwd = step_strang(&s0, dt, &p).unwrap();
        let measured = (q(&fwd) - q(&s0)) / dt;
        let predicted = -2.0 * p.kappa_sharp() * interaction_energy(&psi0, &p).unwrap().re;
        assert!(predicted < 0.0);
        assert!((measured - predicted).abs() <= 0.05 * predicted.abs(), "l={}: {measured} vs {predicted}", ell.ell());
    }
}

#[test]
fn flow_commutes_with_dilation() {
    let f = SpinorField::smooth_random(Grid2D::new(32, 8.0).unwrap(), 9, 1.0, 1.0);
    for ell in ELLS {
        for lam in [0.5, 2.0] {
            let p = DiracParams::default().with_ell(ell);
            let cc = scaling_covariance_check(&f, lam, 0.2, 0.02, &p).unwrap();
            assert!(cc.discrepancy <= cc.discretization_error, "l={} lam={lam}: {cc:?}", ell.ell());
        }
    }
}

#[test]
fn picard_residuals_contract_for_small_data() {
    let p = DiracParams::default();
    let mut psi0 = SpinorField::smooth_random(torus(16), 4, 2.0, 1.0);
    let norm = sobolev_norm(&psi0, 1.0, false).unwrap();
    psi0.scale(Complex64::new(0.1 / norm, 0.0));
    let cfg = PicardConfig { t_final: 0.5, n_iter: 6, quadrature_points: 17, delta: 0.1, s: 1.0 };
    let r = picard_iterate(&psi0, &cfg, &p).unwrap();
    assert!(!r.diverged);
    for w in r.residuals.windows(2) {
        assert!(w[1] < w[0], "{:?}", r.residuals);
    }
    assert!(r.residuals.last().unwrap() / r.residuals[0] < 1e-4);
}

#[test]
fn picard_rejects_degenerate_quadrature() {
    let psi0 = SpinorField::smooth_random(torus(16), 4, 2.0, 0.1);
    let cfg = PicardConfig { t_final: 0.5, n_iter: 2, quadrature_points: 1, delta: 0.1, s: 1.0 };
    assert!(picard_iterate(&psi0, &cfg, &DiracParams::default()).is_err());
}
