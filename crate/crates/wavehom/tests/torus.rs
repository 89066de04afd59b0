use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use wavehom::torus::{media, CellCoefficients, CellOperator, PeriodicField, SolverOptions};
use wavehom::Error;

fn band_limited(dim: usize, n: usize, coeffs: &[(i64, i64, f64, f64)]) -> PeriodicField {
    PeriodicField::from_fn(dim, n, |y| {
        coeffs
            .iter()
            .map(|(m1, m2, c, s)| {
                let ph = 2.0 * PI * (*m1 as f64 * y[0] + if dim == 2 { *m2 as f64 * y[1] } else { 0.0 });
                c * ph.cos() + s * ph.sin()
            })
            .sum()
    })
}

fn sine_medium(n: usize) -> CellCoefficients {
    let a = PeriodicField::from_fn(1, n, |y| 2.0 + (2.0 * PI * y[0]).sin());
    CellCoefficients::new(PeriodicField::constant(1, n, 1.0), vec![a]).unwrap()
}

#[test]
fn mean_of_constant_and_zero_mean_mode() {
    assert_relative_eq!(PeriodicField::constant(1, 32, 3.5).mean(), 3.5, max_relative = 1e-15);
    let s = PeriodicField::from_fn(1, 32, |y| (2.0 * PI * y[0]).sin());
    assert!(s.mean().abs() < 1e-15);
}

#[test]
fn mean_matches_grid_sum() {
    let f = band_limited(2, 16, &[(0, 0, 0.7, 0.0), (1, 2, 0.3, -0.2), (3, -1, 0.1, 0.5)]);
    let grid_mean = f.samples().iter().sum::<f64>() / 256.0;
    assert!((f.mean() - grid_mean).abs() <= 1e-12);
}

#[test]
fn fields_are_real_valued() {
    let f = band_limited(2, 16, &[(2, 1, 1.0, 0.4), (5, -3, 0.2, 0.1)]);
    for m1 in -6i64..=6 {
        for m2 in -6i64..=6 {
            let (a, b) = (f.coeff(&[m1, m2]), f.coeff(&[-m1, -m2]));
            assert!((a - b.conj()).norm() <= 1e-12 * f.max_abs_coeff());
        }
    }
    assert!(f.max_imag_sample() <= 1e-12);
}

#[test]
fn laplacian_eigenfunction() {
    let c = media::named("constant(1)", 1, 32).unwrap();
    let rhs = PeriodicField::from_fn(1, 32, |y| -(2.0 * PI).powi(2) * (2.0 * PI * y[0]).sin());
    let u = c.solve_cell(&rhs, SolverOptions::default()).unwrap();
    let exact = PeriodicField::from_fn(1, 32, |y| (2.0 * PI * y[0]).sin());
    assert!(u.sub(&exact).norm() <= 1e-10);
}

#[test]
fn one_dimensional_cell_solution_is_the_harmonic_quadrature() {
    let n = 128;
    let c = sine_medium(n);
    let rhs = c.a(0, 0).derivative(0).scale(-1.0);
    let u = c.solve_cell(&rhs, SolverOptions { tol: 1e-13, max_iter: 4000 }).unwrap();
    // a (u' + 1) is the harmonic mean, which for 2 + sin is sqrt(3).
    let flux: Vec<f64> = c.a(0, 0).samples().iter().zip(u.derivative(0).samples()).map(|(a, du)| a * (du + 1.0)).collect();
    for v in flux {
        assert!((v - 3f64.sqrt()).abs() <= 1e-9, "{v}");
    }
}

#[test]
fn nonzero_mean_rhs_is_rejected() {
    let c = sine_medium(32);
    let rhs = PeriodicField::constant(1, 32, 1.0);
    assert!(matches!(c.solve_cell(&rhs, SolverOptions::default()), Err(Error::NonZeroMeanRhs { .. })));
}

#[test]
fn operator_examples() {
    let c = sine_medium(32);
    assert!(c.apply(CellOperator::Ayy, &PeriodicField::constant(1, 32, 4.0)).norm() <= 1e-13);
    let rho2 = CellCoefficients::new(PeriodicField::constant(1, 32, 2.0), vec![PeriodicField::constant(1, 32, 1.0)]).unwrap();
    let f = band_limited(1, 32, &[(1, 0, 1.0, 0.5), (4, 0, 0.2, 0.0)]);
    assert!(rho2.apply(CellOperator::RhoMult, &f).sub(&f.scale(2.0)).norm() <= 1e-13);
    // a11 f on a dealiased grid: both factors are band-limited, so the product is exact on 4N points.
    let a = PeriodicField::from_fn(1, 32, |y| 2.0 + (2.0 * PI * y[0]).cos());
    let cc = CellCoefficients::new(PeriodicField::constant(1, 32, 1.0), vec![a.clone()]).unwrap();
    let g = cc.apply(CellOperator::AxxPair(0, 0), &f);
    let fine = 128;
    let (av, fv, gv) = (a.samples_on(fine), f.samples_on(fine), g.samples_on(fine));
    for i in 0..fine {
        assert!((av[i] * fv[i] - gv[i]).abs() <= 1e-12);
    }
}

#[test]
fn ayy_is_self_adjoint_and_axy_is_skew() {
    let c = media::random_smooth(2, 32, 7, true).unwrap();
    let u = band_limited(2, 32, &[(1, 0, 1.0, 0.0), (2, 3, 0.3, 0.7), (-1, 2, 0.5, 0.2)]);
    let v = band_limited(2, 32, &[(0, 1, 0.4, 1.0), (3, -2, 0.6, 0.1)]);
    let lhs = c.apply(CellOperator::Ayy, &u).inner(&v);
    let rhs = u.inner(&c.apply(CellOperator::Ayy, &v));
    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
    for i in 0..2 {
        let l = c.apply(CellOperator::AxyComponent(i), &u).inner(&v);
        let r = u.inner(&c.apply(CellOperator::AxyComponent(i), &v));
        assert!((l + r).abs() <= 1e-12 * l.abs().max(1.0), "axis {i}: {l} vs {r}");
    }
}

#[test]
fn media_reject_degenerate_coefficients() {
    let bad = PeriodicField::from_fn(1, 16, |y| (2.0 * PI * y[0]).sin());
    assert!(CellCoefficients::new(PeriodicField::constant(1, 16, 1.0), vec![bad]).is_err());
    assert!(media::named("two_phase(1,4,1.5)", 1, 16).is_err());
    assert!(media::named("unknown(2)", 1, 16).is_err());
}

#[test]
fn coefficient_text_round_trip() {
    let c = media::random_smooth(2, 8, 3, true).unwrap();
    let back = media::parse_coefficients(&media::format_coefficients(&c)).unwrap();
    assert!(back.rho().sub(c.rho()).norm() <= 1e-14);
    for (x, y) in back.a_fields().iter().zip(c.a_fields()) {
        assert!(x.sub(y).norm() <= 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solve_then_apply_round_trips(seed in 0u64..1000, amps in prop::collection::vec(-1.0f64..1.0, 6)) {
        let c = media::random_smooth(1, 64, seed, false).unwrap();
        let rhs = PeriodicField::from_coeff_fn(1, 64, |m| {
            let k = m[0].unsigned_abs() as usize;
            if (1..=3).contains(&k) {
                let s = if m[0] > 0 { 1.0 } else { -1.0 };
                Complex64::new(amps[2 * k - 2], s * amps[2 * k - 1])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        prop_assume!(rhs.norm() > 1e-3);
        let tol = 1e-11;
        let u = c.solve_cell(&rhs, SolverOptions { tol, max_iter: 4000 }).unwrap();
        let back = c.apply(CellOperator::Ayy, &u);
        prop_assert!(back.sub(&rhs).norm() <= 10.0 * tol * rhs.norm());
        prop_assert!(u.mean().abs() <= 1e-12);
    }

    #[test]
    fn derivative_and_product_are_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let f = band_limited(1, 32, &[(1, 0, 1.0, 0.2), (3, 0, 0.1, 0.4)]);
        let g = band_limited(1, 32, &[(2, 0, 0.5, 0.0), (5, 0, 0.0, 0.3)]);
        let lhs = f.scale(a).add(&g.scale(b)).derivative(0);
        let rhs = f.derivative(0).scale(a).add(&g.derivative(0).scale(b));
        prop_assert!(lhs.sub(&rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}
