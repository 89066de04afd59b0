use proptest::prelude::*;
use std::f64::consts::PI;
use wavehom::cascade::compute_correctors;
use wavehom::operators::{a_star_series, compute_a_star, effective_floor, effective_tensor, matched_scale, odd_operator_ratio, rho_bar};
use wavehom::poly::HomogenizedPoly;
use wavehom::torus::{media, MultiIndex};

#[test]
fn sharp_two_phase_gives_the_harmonic_mean() {
    // Values (1, 4) on halves: harmonic mean 1.6, approached as the truncated interface sharpens.
    let abar = |n| {
        let c = media::named("two_phase(1,4,0.5)", 1, n).unwrap();
        let t = compute_correctors(&c, 1).unwrap();
        let a2 = compute_a_star(&c, &t, 2).unwrap();
        assert!((rho_bar(&a2) - 1.0).abs() <= 1e-14);
        effective_tensor(&a2)[0][0]
    };
    let (coarse, fine) = (abar(128), abar(512));
    assert!((coarse - 1.6).abs() <= 1e-2, "{coarse}");
    assert!((fine - 1.6).abs() < 0.5 * (coarse - 1.6).abs(), "{fine}");
}

#[test]
fn symbol_of_a2_at_one_cell_wavenumber() {
    let a2 = HomogenizedPoly::from_terms(1, [(MultiIndex::new(2, &[0]), 1.0), (MultiIndex::new(0, &[2]), -1.6)]);
    let xi = 2.0 * PI;
    // Direct substitution gives -1.6 xi^2; the Fourier symbol (d -> i xi) gives +1.6 xi^2.
    assert!((a2.evaluate_real(0.0, &[xi]) + 1.6 * xi * xi).abs() <= 1e-12);
    let s = a2.evaluate_symbol(0.0, &[xi]);
    assert!((s.re - 1.6 * xi * xi).abs() <= 1e-12 && s.im == 0.0);
    assert_eq!(HomogenizedPoly::zero(1).evaluate_real(1.3, &[0.7]), 0.0);
}

#[test]
fn odd_operators_vanish_on_random_media() {
    for seed in 1..=5 {
        let c = media::random_smooth(1, 64, seed, true).unwrap();
        let t = compute_correctors(&c, 5).unwrap();
        let s = a_star_series(&c, &t, 6).unwrap();
        assert!(odd_operator_ratio(&s) <= 1e-9, "d = 1 seed {seed}");
    }
    for seed in 1..=2 {
        let c = media::random_smooth(2, 32, seed, true).unwrap();
        let t = compute_correctors(&c, 4).unwrap();
        let s = a_star_series(&c, &t, 5).unwrap();
        assert!(odd_operator_ratio(&s) <= 1e-9, "d = 2 seed {seed}");
    }
}

#[test]
fn constant_medium_has_only_a2() {
    let c = media::named("constant(2)", 2, 8).unwrap();
    let t = compute_correctors(&c, 4).unwrap();
    let s = a_star_series(&c, &t, 5).unwrap();
    assert!(s[1..].iter().all(|p| p.norm() == 0.0));
    assert_eq!(effective_tensor(&s[0]), [[2.0, 0.0], [0.0, 2.0]]);
}

#[test]
fn operators_are_homogeneous_with_even_time_orders() {
    let c = media::random_smooth(2, 16, 3, true).unwrap();
    let t = compute_correctors(&c, 5).unwrap();
    let s = a_star_series(&c, &t, 6).unwrap();
    for (idx, p) in s.iter().enumerate() {
        let n = idx as u32 + 2;
        for (b, v) in p.terms() {
            assert_eq!(b.order(), n);
            if b.time % 2 == 1 {
                assert!(v.abs() <= 1e-9 * matched_scale(&s[0], n as usize));
            }
        }
    }
    assert!(effective_floor(&s[0]) > 0.5);
}

#[test]
fn a4_is_resolution_robust() {
    let a4 = |n| {
        let c = media::random_smooth(1, n, 8, true).unwrap();
        let t = compute_correctors(&c, 3).unwrap();
        compute_a_star(&c, &t, 4).unwrap()
    };
    let (p, q) = (a4(64), a4(128));
    assert!(p.sub(&q).norm() <= 1e-8 * p.norm());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbols_are_homogeneous(c in prop::collection::vec(-3.0f64..3.0, 3), tau in -2.0f64..2.0, xi in -2.0f64..2.0) {
        let p = HomogenizedPoly::from_terms(1, [
            (MultiIndex::new(4, &[0]), c[0]),
            (MultiIndex::new(2, &[2]), c[1]),
            (MultiIndex::new(0, &[4]), c[2]),
        ]);
        let (v1, v2) = (p.evaluate_real(tau, &[xi]), p.evaluate_real(2.0 * tau, &[2.0 * xi]));
        prop_assert!((v2 - 16.0 * v1).abs() <= 1e-12 * (1.0 + v2.abs()));
    }

    #[test]
    fn product_symbol_is_the_product_of_symbols(a in prop::collection::vec(-2.0f64..2.0, 3), b in prop::collection::vec(-2.0f64..2.0, 2), tau in -1.5f64..1.5, xi in -1.5f64..1.5) {
        let p = HomogenizedPoly::from_terms(1, [(MultiIndex::new(2, &[0]), a[0]), (MultiIndex::new(1, &[1]), a[1]), (MultiIndex::new(0, &[2]), a[2])]);
        let q = HomogenizedPoly::from_terms(1, [(MultiIndex::new(1, &[0]), b[0]), (MultiIndex::new(0, &[1]), b[1])]);
        let lhs = p.mul(&q).evaluate_symbol(tau, &[xi]);
        let rhs = p.evaluate_symbol(tau, &[xi]) * q.evaluate_symbol(tau, &[xi]);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
}
