use num_complex::Complex64 as C64;
use wavehom::cascade::compute_correctors;
use wavehom::dispersive::{apply_r_source, assemble_criminal, build_symbol, solve_filtered, stability_threshold};
use wavehom::filter::{Cutoff, FilterSpec};
use wavehom::fit::fit_power_law;
use wavehom::harness::mode_energy_drift;
use wavehom::normal_form::{compute_normal_form, NormalForm};
use wavehom::operators::{a_star_series, effective_tensor};
use wavehom::poly::HomogenizedPoly;
use wavehom::source::{SourceTerm, SpatialProfile, TimePulse};
use wavehom::spectral::{BoxDomain, SpectralSolution};
use wavehom::torus::{media, MultiIndex};
use wavehom::Error;

struct Setup {
    table: wavehom::cascade::CorrectorTable,
    series: Vec<HomogenizedPoly>,
}

fn setup(spec: &str, k: usize) -> Setup {
    let c = media::named(spec, 1, 128).unwrap();
    let table = compute_correctors(&c, 2 * k + 2).unwrap();
    let series = a_star_series(&c, &table, 2 * k + 2).unwrap();
    Setup { table, series }
}

fn reference_filter() -> FilterSpec {
    FilterSpec::new(0.8, Cutoff::new(3.0, 4.0), Cutoff::new(5.0, 6.0)).unwrap()
}

fn norm_dx(v: &SpectralSolution, t: f64) -> f64 {
    v.mixed_derivative(t, &MultiIndex::new(0, &[1])).unwrap().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn constant_medium_symbol_is_exact() {
    let s = setup("constant(1.7)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let sym = build_symbol(&nf, 0.1, &FilterSpec::default()).unwrap();
    for xi in [0.1, 1.0, 7.5, 40.0] {
        assert!((sym.mu(&[xi]) - 1.7 * xi * xi).abs() <= 1e-14 * xi * xi);
        assert_eq!(sym.mu(&[xi]), sym.homogenized(&[xi]));
    }
}

#[test]
fn outside_psi2_the_symbol_is_homogenized() {
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let f = reference_filter();
    let eps = 0.125;
    let sym = build_symbol(&nf, eps, &f).unwrap();
    let xi = 1.01 * f.correction_band(eps);
    assert_eq!(sym.mu(&[xi]), sym.homogenized(&[xi]));
    assert!((sym.homogenized(&[xi]) - effective_tensor(&s.series[0])[0][0] * xi * xi).abs() <= 1e-12 * xi * xi);
}

#[test]
fn filtered_symbol_bounds_and_unfiltered_ill_posedness() {
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let f = FilterSpec::new(0.5, Cutoff::new(1.0, 2.0), Cutoff::new(2.5, 3.5)).unwrap();
    let eps = 0.0625;
    let sym = build_symbol(&nf, eps, &f).unwrap();
    let abar = effective_tensor(&s.series[0])[0][0];
    let pts: Vec<Vec<f64>> = (1..=4000).map(|i| vec![2.0 * f.correction_band(eps) * i as f64 / 4000.0]).collect();
    let (lo, hi) = sym.ratio_bounds(pts.iter().map(|p| p.as_slice()));
    assert!(lo >= 0.5 * abar && hi <= 2.0 * abar, "{lo} {hi}");
    // a~_4 < 0 for a nonconstant a and constant rho, so the unfiltered symbol turns negative.
    assert!(nf.a_tilde[0].evaluate_symbol(0.0, &[1.0]).re < 0.0);
    let negative = (1..200).map(|i| i as f64 * f.correction_band(eps)).any(|x| sym.unfiltered(&[x]) < 0.0);
    assert!(negative);
}

#[test]
fn eps_above_threshold_is_rejected() {
    let s = setup("two_phase(1,4,0.5,0.1)", 3);
    let nf = compute_normal_form(&s.series, 3).unwrap();
    let f = reference_filter();
    let eps0 = stability_threshold(&nf, &f);
    assert!(eps0 > 0.0 && eps0 < 1.0);
    assert!(build_symbol(&nf, 0.99 * eps0, &f).is_ok());
    match build_symbol(&nf, (1.5 * eps0).min(1.0), &f) {
        Err(Error::EpsilonTooLarge { eps0: e, .. }) => assert_eq!(e, eps0),
        other => panic!("expected EpsilonTooLarge, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn zero_source_gives_zero_solution() {
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let src = SourceTerm::new(TimePulse::Constant(0.0), SpatialProfile::gaussian(1.0));
    let v = solve_filtered(&nf, 0.125, &reference_filter(), &src, &BoxDomain::new(60.0, 5.0), 1e-3).unwrap();
    for t in [0.5, 2.0, 5.0] {
        assert!(v.time_derivatives(t, 1).unwrap().iter().flatten().all(|c| *c == C64::new(0.0, 0.0)));
    }
}

#[test]
fn single_mode_matches_the_duhamel_formula() {
    let s = setup("constant(2)", 1);
    let nf = compute_normal_form(&s.series, 1).unwrap();
    let src = SourceTerm::new(TimePulse::Constant(1.0), SpatialProfile::gaussian(1.0));
    let l = 40.0;
    let eps = 1e-4;
    let v = solve_filtered(&nf, eps, &FilterSpec::default(), &src, &BoxDomain::new(l, 5.0), 1e-3).unwrap();
    let modes = v.modes();
    for t in [0.4, 1.0, 2.7, 5.0] {
        let vals = &v.time_derivatives(t, 0).unwrap()[0];
        for i in 0..modes.len() {
            let xi = modes.xi(i);
            let g = src.profile.box_coefficient(modes.q(i), l).unwrap();
            let exact = if xi == 0.0 {
                g * if t <= 1.0 { 0.5 * t * t } else { t - 0.5 }
            } else {
                let w = (2.0 * xi * xi).sqrt();
                let shape = if t <= 1.0 { 1.0 - (w * t).cos() } else { (w * (t - 1.0)).cos() - (w * t).cos() };
                g * shape / (w * w)
            };
            assert!((vals[i] - exact).norm() <= 1e-8 * g.norm().max(1e-300) + 1e-14, "t = {t} xi = {xi}");
        }
    }
}

#[test]
fn mode_energy_is_conserved_after_the_source() {
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let v = solve_filtered(&nf, 0.125, &reference_filter(), &src, &BoxDomain::new(80.0, 20.0), 1e-3).unwrap();
    assert!(mode_energy_drift(&v, 1.0, 20.0).unwrap() <= 1e-10);
}

#[test]
fn filtered_modes_vanish_outside_psi1() {
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let f = FilterSpec::new(0.5, Cutoff::new(0.5, 1.0), Cutoff::new(2.5, 3.5)).unwrap();
    let eps = 0.0625;
    let src = SourceTerm::default_with_width(0.3);
    let v = solve_filtered(&nf, eps, &f, &src, &BoxDomain::new(60.0, 3.0), 1e-3).unwrap();
    let modes = v.modes();
    let vals = &v.time_derivatives(2.0, 1).unwrap();
    for i in 0..modes.len() {
        if f.psi1(eps, modes.xi(i).abs()) == 0.0 {
            assert_eq!(vals[0][i], C64::new(0.0, 0.0));
            assert_eq!(vals[1][i], C64::new(0.0, 0.0));
        }
    }
    assert!(modes.xi_max() <= f.source_band(eps) + 2.0 * std::f64::consts::PI / 60.0);
}

#[test]
fn derivatives_stay_bounded_in_time() {
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let v = solve_filtered(&nf, 0.125, &reference_filter(), &src, &BoxDomain::new(200.0, 60.0), 1e-3).unwrap();
    let at2 = norm_dx(&v, 2.0);
    for i in 0..30 {
        assert!(norm_dx(&v, 2.0 + 2.0 * i as f64) <= 10.0 * at2);
    }
}

#[test]
fn time_step_refinement_is_fourth_order() {
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let run = |dt| solve_filtered(&nf, 0.125, &reference_filter(), &src, &BoxDomain::new(60.0, 4.0), dt).unwrap();
    let sols: Vec<SpectralSolution> = [0.05, 0.025, 0.0125, 0.00625].iter().map(|dt| run(*dt)).collect();
    let vals: Vec<Vec<C64>> = sols.iter().map(|v| v.time_derivatives(4.0, 0).unwrap().remove(0)).collect();
    let diffs: Vec<f64> = (0..3).map(|i| vals[i].iter().zip(&vals[i + 1]).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()).collect();
    let f = fit_power_law(&[0.05, 0.025, 0.0125], &diffs).unwrap();
    assert!(f.slope >= 3.5, "order {} from {diffs:?}", f.slope);
}

#[test]
fn r_source_matches_finite_differences() {
    let a2 = HomogenizedPoly::from_terms(1, [(MultiIndex::new(0, &[2]), -1.0)]);
    let nf = NormalForm {
        k: 1,
        dim: 1,
        rho_bar: 1.0,
        a2,
        r: vec![HomogenizedPoly::from_terms(1, [(MultiIndex::new(2, &[0]), -1.0)])],
        a_tilde: vec![HomogenizedPoly::zero(1)],
        dropped_odd: 0.0,
    };
    let src = SourceTerm::default_with_width(1.0);
    let (l, eps, h) = (40.0, 0.1, 1e-4);
    let filter = FilterSpec::default();
    let forcing = apply_r_source(&nf, eps, &filter, &src, l);
    let p = |t: f64| src.pulse.value(t);
    for t in [0.2, 0.5, 0.73] {
        for q in [0i64, 3, 17] {
            let xi = 2.0 * std::f64::consts::PI * q as f64 / l;
            let g = src.profile.box_coefficient(q, l).unwrap() * filter.psi1(eps, xi);
            let fd = p(t) - eps * eps * (p(t + h) - 2.0 * p(t) + p(t - h)) / (h * h);
            assert!((forcing.eval(t, q).unwrap() - g * fd).norm() <= 1e-6 * g.norm().max(1e-300));
        }
    }
    let plain = apply_r_source(&nf, 0.0, &filter, &src, l);
    let g = src.profile.box_coefficient(5, l).unwrap();
    assert!((plain.eval(0.4, 5).unwrap() - g * p(0.4)).norm() <= 1e-15);
    let empty = NormalForm { r: Vec::new(), a_tilde: Vec::new(), k: 0, ..nf };
    let bare = apply_r_source(&empty, 0.3, &FilterSpec::default(), &src, l);
    assert!((bare.eval(0.4, 5).unwrap() - g * p(0.4) * FilterSpec::default().psi1(0.3, 2.0 * std::f64::consts::PI * 5.0 / l)).norm() <= 1e-15);
}

#[test]
fn criminal_assembly_matches_dense_summation() {
    let s = setup("two_phase(1,4,0.5,0.1)", 1);
    let nf = compute_normal_form(&s.series, 1).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let eps = 0.125;
    let v = solve_filtered(&nf, eps, &reference_filter(), &src, &BoxDomain::new(40.0, 4.0), 1e-3).unwrap();
    let crim = assemble_criminal(&v, &s.table, eps, 1).unwrap();
    let t = 3.0;
    for i in 0..41 {
        let x = -5.0 + 0.25 * i as f64;
        let y = (x / eps).rem_euclid(1.0);
        let mut dense = v.eval(t, x, &MultiIndex::new(0, &[0])).unwrap();
        for n in 1..=4 {
            for (beta, c) in s.table.level(n) {
                dense += eps.powi(n as i32) * c.eval(&[y]) * v.eval(t, x, beta).unwrap();
            }
        }
        assert!((crim.sample(t, x).unwrap()[0] - dense).abs() <= 1e-10, "x = {x}");
    }
}

#[test]
fn criminal_tends_to_the_profile_as_eps_shrinks() {
    let s = setup("two_phase(1,4,0.5,0.1)", 1);
    let nf = compute_normal_form(&s.series, 1).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let (t, x) = (3.0, 0.37);
    let mut last = f64::INFINITY;
    for eps in [0.1, 0.01, 0.001] {
        let v = solve_filtered(&nf, eps, &reference_filter(), &src, &BoxDomain::new(40.0, 4.0), 1e-3).unwrap();
        let crim = assemble_criminal(&v, &s.table, eps, 1).unwrap();
        let gap = (crim.sample(t, x).unwrap()[0] - v.eval(t, x, &MultiIndex::new(0, &[0])).unwrap()).abs();
        assert!(gap < last);
        last = gap;
    }
    assert!(last <= 1e-3);
}

#[test]
fn constant_medium_criminal_is_the_profile() {
    let s = setup("constant(1.2)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let v = solve_filtered(&nf, 0.1, &FilterSpec::default(), &src, &BoxDomain::new(40.0, 4.0), 1e-3).unwrap();
    let crim = assemble_criminal(&v, &s.table, 0.1, 2).unwrap();
    for x in [-1.0, 0.0, 2.5] {
        assert!((crim.sample(3.0, x).unwrap()[0] - v.eval(3.0, x, &MultiIndex::new(0, &[0])).unwrap()).abs() <= 1e-13);
    }
}

#[test]
fn criminal_order_is_robust_in_alpha() {
    use wavehom::reference::{energy_error, BlochReference, BlochSettings};
    let c = media::named("two_phase(1,4,0.5,0.1)", 1, 128).unwrap();
    let s = setup("two_phase(1,4,0.5,0.1)", 2);
    let nf = compute_normal_form(&s.series, 2).unwrap();
    let src = SourceTerm::default_with_width(1.0);
    let t = 5.0;
    let domain = BoxDomain::new(40.0, t);
    let eps = [0.125, 0.0625, 0.03125];
    let refs: Vec<BlochReference> = eps.iter().map(|e| BlochReference::solve(&c, *e, &src, &domain, &BlochSettings::default()).unwrap()).collect();
    for alpha in [0.3, 0.5, 0.8] {
        let f = FilterSpec::new(alpha, Cutoff::new(3.0, 4.0), Cutoff::new(5.0, 6.0)).unwrap();
        let errs: Vec<f64> = eps
            .iter()
            .zip(&refs)
            .map(|(e, r)| {
                let v = solve_filtered(&nf, *e, &f, &src, &domain, 1e-3).unwrap();
                energy_error(r, &assemble_criminal(&v, &s.table, *e, 2).unwrap(), t).unwrap().energy
            })
            .collect();
        let order = fit_power_law(&eps, &errs).unwrap().slope;
        assert!(order >= 4.5, "alpha = {alpha}: order {order} from {errs:?}");
    }
}
