use std::f64::consts::PI;
use num_complex::Complex64 as C64;
use wavehom::cascade::compute_correctors;
use wavehom::classical::solve_hierarchy;
use wavehom::fit::fit_power_law;
use wavehom::operators::a_star_series;
use wavehom::reference::{
    energy_error, grid_energy_error, max_wave_speed, residual_h_minus1, sample_two_scale_ratios, snapshot_error, two_scale_l2_ratio, BlochReference, BlochSettings, LeapfrogReference,
    LeapfrogSettings, Reference,
};
use wavehom::source::SourceTerm;
use wavehom::spectral::BoxDomain;
use wavehom::torus::{media, CellCoefficients, PeriodicField};
use wavehom::two_scale::{apply_corrector_series, BoxSnapshot, TwoScaleExpansion};
use wavehom::Error;

fn sine_medium() -> CellCoefficients {
    let a = PeriodicField::from_fn(1, 64, |y| 2.0 + (2.0 * PI * y[0]).sin());
    CellCoefficients::new(PeriodicField::from_fn(1, 64, |y| 1.0 + 0.3 * (2.0 * PI * y[0]).cos()), vec![a]).unwrap()
}

fn homogenized(coeffs: &CellCoefficients, eps: f64, domain: &BoxDomain, src: &SourceTerm) -> TwoScaleExpansion {
    let table = compute_correctors(coeffs, 2).unwrap();
    let series = a_star_series(coeffs, &table, 2).unwrap();
    let exp = solve_hierarchy(&series, src, 0, domain, 1e-3).unwrap();
    apply_corrector_series(&table, exp.profile(0), eps, 0).unwrap()
}

#[test]
fn bloch_reference_is_exact_for_a_constant_medium() {
    let c = media::named("constant(2)", 1, 16).unwrap();
    let (eps, t) = (0.25, 3.0);
    let domain = BoxDomain::new(32.0, t);
    let src = SourceTerm::default_with_width(1.0);
    let bloch = BlochReference::solve(&c, eps, &src, &domain, &BlochSettings::default()).unwrap();
    let exact = homogenized(&c, eps, &domain, &src);
    let e = energy_error(&bloch, &exact, t).unwrap();
    let scale = exact.snapshot(t, 2).unwrap().energy_norm();
    assert!(e.energy <= 1e-8 * scale, "{} vs {scale}", e.energy);
    assert!(e.l2 <= 1e-8 * exact.snapshot(t, 1).unwrap().l2_norm());
}

#[test]
fn leapfrog_matches_the_exact_constant_medium_solution() {
    let c = media::named("constant(1)", 1, 16).unwrap();
    let (eps, t) = (0.25, 4.0);
    let domain = BoxDomain::new(32.0, t);
    let src = SourceTerm::default_with_width(1.0);
    let settings = LeapfrogSettings { points_per_period: 32, cfl: 0.9 };
    let lf = LeapfrogReference::solve(&c, eps, &src, &domain, &settings, &[t]).unwrap();
    assert_eq!(lf.n, 4096);
    let exact = homogenized(&c, eps, &domain, &src);
    let e = grid_energy_error(&lf, &exact, t).unwrap();
    assert!(e.energy <= 1e-4, "{}", e.energy);
}

#[test]
fn leapfrog_converges_at_second_order() {
    let c = sine_medium();
    let (eps, t) = (0.25, 3.0);
    let domain = BoxDomain::new(32.0, t);
    let src = SourceTerm::default_with_width(1.0);
    let bloch = BlochReference::solve(&c, eps, &src, &domain, &BlochSettings::default()).unwrap();
    let exact = bloch.snapshot(t, 2).unwrap();
    let mut errs = Vec::new();
    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    for ppp in [16usize, 32, 64] {
        let lf = LeapfrogReference::solve(&c, eps, &src, &domain, &LeapfrogSettings { points_per_period: ppp, cfl: 0.5 }, &[t]).unwrap();
        errs.push(snapshot_error(&exact, &lf.snapshot(t, 2).unwrap()).unwrap().energy);
    }
    let slope = fit_power_law(&hs, &errs).unwrap().slope;
    assert!((slope - 2.0).abs() <= 0.2, "order {slope} from {errs:?}");
}

#[test]
fn leapfrog_energy_is_conserved_over_long_runs() {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128).unwrap();
    let eps = 0.25;
    let src = SourceTerm::default_with_width(1.0);
    let settings = LeapfrogSettings { points_per_period: 16, cfl: 0.9 };
    let probe = LeapfrogReference::solve_periodic(&c, eps, &src, &BoxDomain::new(16.0, 1.0), &settings, &[1.0]).unwrap();
    let t = (101_000.0 * probe.dt).ceil();
    let lf = LeapfrogReference::solve_periodic(&c, eps, &src, &BoxDomain::new(16.0, t), &settings, &[t]).unwrap();
    assert!(lf.steps >= 100_000, "{}", lf.steps);
    assert!(lf.energy_drift <= 1e-10, "{}", lf.energy_drift);
}

#[test]
fn solutions_respect_the_finite_speed() {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128).unwrap();
    let (eps, t) = (0.125, 4.0);
    let domain = BoxDomain::new(40.0, t);
    let src = SourceTerm::default_with_width(0.5);
    let reach = src.profile.radius() + max_wave_speed(&c).unwrap() * t;
    let lf = LeapfrogReference::solve(&c, eps, &src, &domain, &LeapfrogSettings::default(), &[t]).unwrap();
    let (u, _) = lf.samples(t).unwrap();
    let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, v) in lf.grid().iter().zip(u) {
        if x.abs() > reach + 0.5 {
            assert!(v.abs() <= 1e-12 * peak, "x = {x}");
        }
    }
    let bloch = BlochReference::solve(&c, eps, &src, &domain, &BlochSettings::default()).unwrap();
    let snap = bloch.snapshot(t, 1).unwrap();
    let far = snap.eval(0.5 * 40.0 - 0.1, 0, 0).abs();
    assert!(far <= 1e-8 * snap.eval(0.0, 0, 0).abs().max(peak));
}

#[test]
fn boxes_inside_the_reach_are_rejected() {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 64).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let r = BlochReference::solve(&c, 0.25, &src, &BoxDomain::new(8.0, 10.0), &BlochSettings::default());
    assert!(matches!(r, Err(Error::BoxTooSmall { .. })));
}

#[test]
fn error_norms_against_self_and_zero() {
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128).unwrap();
    let (eps, t) = (0.25, 3.0);
    let domain = BoxDomain::new(32.0, t);
    let src = SourceTerm::default_with_width(1.0);
    let bloch = BlochReference::solve(&c, eps, &src, &domain, &BlochSettings::default()).unwrap();
    let snap = bloch.snapshot(t, 2).unwrap();
    let own = snapshot_error(&snap, &snap).unwrap();
    assert_eq!((own.energy, own.l2), (0.0, 0.0));

    // E = 1/2 int rho u_t^2 + a u_x^2 brackets the unweighted norm of the zero error.
    let lf = LeapfrogReference::solve(&c, eps, &src, &domain, &LeapfrogSettings { points_per_period: 64, cfl: 0.5 }, &[t]).unwrap();
    let e = lf.energy_at(t);
    let zero = BoxSnapshot::zeros(32.0, snap.cells, t, 2, (0, 0), (0, 0)).unwrap();
    let norm = snapshot_error(&snap, &zero).unwrap().energy;
    assert!(norm <= (2.0 * e / 1.0).sqrt() * 1.01 && norm >= (2.0 * e / 4.0).sqrt() * 0.99, "{norm} vs E = {e}");
    assert_eq!(snapshot_error(&snap, &zero).unwrap().l2, snap.l2_norm());
}

#[test]
fn residual_separates_exact_and_homogenized_solutions() {
    let c = sine_medium();
    let (eps, t) = (0.25, 3.0);
    let domain = BoxDomain::new(32.0, t);
    let src = SourceTerm::default_with_width(1.0);
    let bloch = BlochReference::solve(&c, eps, &src, &domain, &BlochSettings::default()).unwrap();
    let r_exact = residual_h_minus1(&bloch.snapshot(t, 3).unwrap(), &c, &src).unwrap();
    let u0 = homogenized(&c, eps, &domain, &src);
    let r_hom = residual_h_minus1(&u0.snapshot(t, 3).unwrap(), &c, &src).unwrap();
    assert!(r_exact <= 1e-8 * r_hom, "{r_exact} vs {r_hom}");
    assert!(residual_h_minus1(&bloch.snapshot(t, 2).unwrap(), &c, &src).is_err());
}

#[test]
fn two_scale_ratio_of_plane_waves() {
    let (l, eps) = (8.0, 0.125);
    for (q, m) in [(0i64, 1i64), (5, 2), (-20, 7)] {
        let xi = 2.0 * PI * q as f64 / l;
        let r = two_scale_l2_ratio(l, eps, &[(q, C64::new(0.3, -0.4))], &[(m, C64::new(1.2, 0.0))]).unwrap();
        assert!((r - 1.0 / (1.0 + (eps * xi).powi(2))).abs() <= 1e-12, "q = {q}, m = {m}");
    }
}

#[test]
fn two_scale_ratio_is_bounded_uniformly_in_eps() {
    let mut tops = Vec::new();
    for eps in [0.125, 0.0625] {
        let r = sample_two_scale_ratios(8.0, eps, 100, 7).unwrap();
        let top = r.iter().cloned().fold(0.0, f64::max);
        assert!(top <= 1.5, "eps = {eps}: {top}");
        tops.push(top);
    }
    assert!((tops[0] - tops[1]).abs() <= 0.1);
}
