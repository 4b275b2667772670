use num_complex::Complex64;
use proptest::prelude::*;

use dirac_core::spectral_core::checkpoint::Checkpoint;
use dirac_core::spectral_core::{
    apply_multiplier, dirac_operator, dirac_projection, frequency_project, half_wave_propagate, sobolev_norm, DiracParams, Grid2D, MultiplierSpec, Region, Sign, SpinorField,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mean_zero(g: Grid2D, seed: u64, kmax: i64) -> SpinorField {
    let mut f = SpinorField::random_band_limited(g, seed, kmax, |_| 1.0);
    for comp in f.components_mut().iter_mut() {
        comp[0] = c(0.0, 0.0);
    }
    f
}

fn rel(a: &SpinorField, b: &SpinorField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(a.l2_norm())
}

fn lambda(pick: bool) -> Complex64 {
    if pick {
        c(2.0, 1.0)
    } else {
        c(1.0, 0.0)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projections_form_a_resolution_of_identity(seed in any::<u64>(), big in any::<bool>(), pick in any::<bool>(), box_len in 1.0f64..20.0) {
        let n = if big { 64 } else { 16 };
        let g = Grid2D::new(n, box_len).unwrap();
        let f = mean_zero(g, seed, (n / 2 - 1) as i64);
        let p = DiracParams::default().with_lambda_sharp(lambda(pick));
        let pp = dirac_projection(&f, Sign::Plus, &p);
        let pm = dirac_projection(&f, Sign::Minus, &p);
        prop_assert!(rel(&dirac_projection(&pp, Sign::Plus, &p), &pp) <= 1e-12);
        prop_assert!(rel(&dirac_projection(&pm, Sign::Minus, &p), &pm) <= 1e-12);
        prop_assert!(dirac_projection(&pp, Sign::Minus, &p).l2_norm() <= 1e-12 * f.l2_norm());
        prop_assert!(dirac_projection(&pm, Sign::Plus, &p).l2_norm() <= 1e-12 * f.l2_norm());
        prop_assert!(rel(&pp.add(&pm).unwrap(), &f) <= 1e-12);
    }

    #[test]
    fn dirac_operator_is_scaled_half_wave_generator(seed in any::<u64>(), big in any::<bool>(), pick in any::<bool>()) {
        let n = if big { 64 } else { 16 };
        let g = Grid2D::new(n, 7.0).unwrap();
        let f = mean_zero(g, seed, (n / 2 - 1) as i64);
        let lam = lambda(pick);
        let p = DiracParams::default().with_lambda_sharp(lam);
        let diff = dirac_projection(&f, Sign::Plus, &p).sub(&dirac_projection(&f, Sign::Minus, &p)).unwrap();
        let want = apply_multiplier(&diff, &MultiplierSpec::abs_grad(g)).unwrap().scaled(c(lam.norm(), 0.0));
        prop_assert!(rel(&dirac_operator(&f, &p), &want) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn half_wave_is_a_reversible_isometry(seed in any::<u64>(), t in -20.0f64..20.0, plus in any::<bool>()) {
        let g = Grid2D::new(32, 5.0).unwrap();
        let f = SpinorField::random_band_limited(g, seed, 15, |_| 1.0);
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let a = half_wave_propagate(&f, t, sign).unwrap();
        prop_assert!((a.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
        prop_assert!(rel(&half_wave_propagate(&a, -t, sign).unwrap(), &f) <= 1e-12);
    }

    #[test]
    fn frequency_projection_is_idempotent(seed in any::<u64>(), mu in 0.5f64..8.0, cx in -4.0f64..4.0, r in 0.0f64..6.0) {
        let g = Grid2D::new(32, 6.0).unwrap();
        let f = SpinorField::random_band_limited(g, seed, 15, |_| 1.0);
        for region in [Region::Annulus { mu }, Region::Low { mu }, Region::Ball { center: [cx, 0.5], radius: r }, Region::Box { center: [cx, -1.0], half_widths: [r, 0.5 * r] }] {
            let once = frequency_project(&f, &region).unwrap();
            let twice = frequency_project(&once, &region).unwrap();
            prop_assert!(twice.sub(&once).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
        }
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 8, 16]), phys in any::<bool>()) {
        let g = Grid2D::new(n, 3.5).unwrap();
        let mut f = SpinorField::random_band_limited(g, seed, (n / 2) as i64, |_| 1.0);
        if phys {
            f = f.in_physical();
        }
        let back: SpinorField = Checkpoint::decode(&Checkpoint::from_field(&f).encode()).unwrap().into_field().unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn time_derivative_of_the_propagator_is_second_order() {
    // i∂ₜS±(t)f = ±|∇|S±(t)f by central differences; the residual must drop 4× per halving
    let g = Grid2D::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let f = SpinorField::smooth_random(g, 3, 3.0, 1.0);
    for sign in Sign::BOTH {
        let t = 0.4;
        let u = half_wave_propagate(&f, t, sign).unwrap();
        let grad = apply_multiplier(&u, &MultiplierSpec::abs_grad(g)).unwrap();
        let residual = |h: f64| {
            let up = half_wave_propagate(&f, t + h, sign).unwrap();
            let dn = half_wave_propagate(&f, t - h, sign).unwrap();
            let dt = up.sub(&dn).unwrap().scaled(c(0.0, 1.0 / (2.0 * h)));
            let mut r = dt;
            r.axpy(c(-sign.value(), 0.0), &grad).unwrap();
            r.l2_norm()
        };
        let (a, b) = (residual(1e-2), residual(5e-3));
        let order = (a / b).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }
}

#[test]
fn box_like_data_norms_track_the_scale() {
    let g = Grid2D::new(64, 2.0 * std::f64::consts::PI).unwrap();
    let f = SpinorField::plane_wave(g, [6, 8], [c(1.0, 0.0), c(0.0, 0.0)]);
    let l2 = f.l2_norm();
    let h1 = sobolev_norm(&f, 1.0, true).unwrap();
    assert!((h1 / l2 - 10.0).abs() < 1e-12);
}
