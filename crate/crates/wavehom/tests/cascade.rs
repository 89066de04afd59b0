use std::f64::consts::PI;
use wavehom::cascade::{cascade_solver_options, compute_correctors, level_difference, word_sum_oracle};
use wavehom::classical::solve_hierarchy;
use wavehom::operators::a_star_series;
use wavehom::source::SourceTerm;
use wavehom::spectral::BoxDomain;
use wavehom::torus::{media, CellCoefficients, MultiIndex, PeriodicField};
use wavehom::two_scale::apply_corrector_series;

fn two_phase() -> CellCoefficients {
    media::named("two_phase(1,4,0.5,0.1)", 1, 128).unwrap()
}

#[test]
fn constant_medium_has_no_correctors() {
    let c = media::named("constant(2.5)", 2, 16).unwrap();
    let t = compute_correctors(&c, 4).unwrap();
    for k in 1..=4 {
        assert!(t.level(k).values().all(|f| f.is_zero()), "level {k}");
    }
}

#[test]
fn first_corrector_is_the_classical_one() {
    let c = two_phase();
    let t = compute_correctors(&c, 1).unwrap();
    let c1 = &t.level(1)[&MultiIndex::new(0, &[1])];
    let a = c.a(0, 0).samples();
    let harmonic = 1.0 / (a.iter().map(|v| 1.0 / v).sum::<f64>() / a.len() as f64);
    for (du, av) in c1.derivative(0).samples().iter().zip(&a) {
        assert!((du - (harmonic / av - 1.0)).abs() <= 1e-9);
    }
}

#[test]
fn constant_rho_keeps_low_time_orders() {
    // d_t^2 only enters through rho chi_{k-2}, so the time order is at most 2 floor((k - 1) / 2).
    let c = media::random_smooth(1, 64, 11, false).unwrap();
    let t = compute_correctors(&c, 5).unwrap();
    for k in 1..=5usize {
        let bound = 2 * ((k - 1) / 2) as u32;
        for (beta, f) in t.level(k) {
            if beta.time > bound {
                assert!(f.norm() <= 1e-12, "k = {k}, beta = {beta}");
            }
        }
    }
    assert!(t.level(2).iter().all(|(b, f)| b.time == 0 || f.norm() <= 1e-12));
    assert!(t.level(3)[&MultiIndex::new(2, &[1])].norm() > 1e-6);
}

#[test]
fn recursion_matches_word_sums() {
    for (c, name) in [(two_phase(), "two_phase"), (media::random_smooth(1, 64, 5, true).unwrap(), "random1d"), (media::random_smooth(2, 16, 2, true).unwrap(), "random2d")] {
        let t = compute_correctors(&c, 4).unwrap();
        for k in 1..=4 {
            let w = word_sum_oracle(&c, k, cascade_solver_options()).unwrap();
            let d = level_difference(&w, t.level(k));
            assert!(d <= 1e-9, "{name} k = {k}: {d:.3e}");
        }
    }
}

#[test]
fn entries_are_mean_free_and_homogeneous() {
    let c = media::random_smooth(2, 16, 9, true).unwrap();
    let t = compute_correctors(&c, 4).unwrap();
    for k in 1..=4 {
        for (beta, f) in t.level(k) {
            assert_eq!(beta.order() as usize, k);
            assert!(f.mean().abs() <= 1e-10 * f.norm().max(1e-300));
        }
    }
}

#[test]
fn doubling_resolution_keeps_smooth_correctors() {
    let coarse = media::random_smooth(1, 64, 4, true).unwrap();
    let fine = media::random_smooth(1, 128, 4, true).unwrap();
    let (tc, tf) = (compute_correctors(&coarse, 4).unwrap(), compute_correctors(&fine, 4).unwrap());
    for k in 1..=4 {
        for (beta, f) in tc.level(k) {
            let g = &tf.level(k)[beta];
            let scale = f.norm().max(1e-300);
            let d = f.samples_on(256).iter().zip(g.samples_on(256)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / 16.0;
            assert!(d <= 1e-8 * scale.max(1.0), "k = {k}, beta = {beta}: {d:.3e}");
        }
    }
}

#[test]
fn corrector_series_matches_dense_evaluation() {
    let c = two_phase();
    let table = compute_correctors(&c, 2).unwrap();
    let series = a_star_series(&c, &table, 2).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let exp = solve_hierarchy(&series, &src, 0, &BoxDomain::new(40.0, 4.0), 1e-3).unwrap();
    let base = exp.profile(0);
    let eps = 0.125;
    let zero = apply_corrector_series(&table, base, eps, 0).unwrap();
    let one = apply_corrector_series(&table, base, eps, 1).unwrap();
    let c1 = &table.level(1)[&MultiIndex::new(0, &[1])];
    let t = 3.0;
    for i in 0..97 {
        let x = -6.0 + 0.125 * i as f64;
        let u0 = base.eval(t, x, &MultiIndex::new(0, &[0])).unwrap();
        let du0 = base.eval(t, x, &MultiIndex::new(0, &[1])).unwrap();
        let y = (x / eps).rem_euclid(1.0);
        assert!((zero.sample(t, x).unwrap()[0] - u0).abs() <= 1e-12);
        let dense = u0 + eps * c1.eval(&[y]) * du0;
        assert!((one.sample(t, x).unwrap()[0] - dense).abs() <= 1e-10, "x = {x}");
    }
}

#[test]
fn constant_medium_series_is_the_base() {
    let c = media::named("constant(1.5)", 1, 32).unwrap();
    let table = compute_correctors(&c, 4).unwrap();
    let series = a_star_series(&c, &table, 4).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let exp = solve_hierarchy(&series, &src, 0, &BoxDomain::new(40.0, 3.0), 1e-3).unwrap();
    let s = apply_corrector_series(&table, exp.profile(0), 0.1, 4).unwrap();
    for x in [-2.0, -0.3, 0.0, 1.7] {
        let v = s.sample(2.5, x).unwrap()[0];
        let b = exp.profile(0).eval(2.5, x, &MultiIndex::new(0, &[0])).unwrap();
        assert!((v - b).abs() <= 1e-13);
    }
}

#[test]
fn cell_ode_oracle_for_a_sine_medium() {
    let n = 64;
    let a = PeriodicField::from_fn(1, n, |y| 2.0 + (2.0 * PI * y[0]).sin());
    let c = CellCoefficients::new(PeriodicField::constant(1, n, 1.0), vec![a]).unwrap();
    let t = compute_correctors(&c, 1).unwrap();
    let c1 = &t.level(1)[&MultiIndex::new(0, &[1])];
    for (y, du) in (0..n).map(|i| i as f64 / n as f64).zip(c1.derivative(0).samples()) {
        let exact = 3f64.sqrt() / (2.0 + (2.0 * PI * y).sin()) - 1.0;
        assert!((du - exact).abs() <= 1e-9);
    }
}
