use proptest::prelude::*;
use wavehom::cascade::compute_correctors;
use wavehom::normal_form::{compute_normal_form, invert_r_series, verify_inverse, verify_inverse_reduction, verify_reduction, NormalForm};
use wavehom::operators::a_star_series;
use wavehom::poly::HomogenizedPoly;
use wavehom::torus::{media, MultiIndex};
use wavehom::Error;

fn m(t: u32, x: u32) -> MultiIndex {
    MultiIndex::new(t, &[x])
}

fn hand_series() -> Vec<HomogenizedPoly> {
    vec![
        HomogenizedPoly::from_terms(1, [(m(2, 0), 1.0), (m(0, 2), -1.0)]),
        HomogenizedPoly::zero(1),
        HomogenizedPoly::from_terms(1, [(m(4, 0), 1.0), (m(2, 2), 2.0), (m(0, 4), 3.0)]),
    ]
}

fn medium_series(spec: &str, k: usize) -> Vec<HomogenizedPoly> {
    let c = media::named(spec, 1, 128).unwrap();
    let t = compute_correctors(&c, 2 * k + 1).unwrap();
    a_star_series(&c, &t, 2 * k + 2).unwrap()
}

#[test]
fn a2_alone_needs_no_elimination() {
    let nf = compute_normal_form(&hand_series()[..1], 0).unwrap();
    assert!(nf.r.is_empty() && nf.a_tilde.is_empty());
    assert!(invert_r_series(&nf).is_empty());
}

#[test]
fn hand_example_and_its_identities() {
    let s = hand_series();
    let nf = compute_normal_form(&s, 1).unwrap();
    assert_eq!(nf.r[0], HomogenizedPoly::from_terms(1, [(m(2, 0), -1.0), (m(0, 2), -3.0)]));
    assert_eq!(nf.a_tilde[0], HomogenizedPoly::from_terms(1, [(m(0, 4), 6.0)]));
    assert!(verify_reduction(&nf, &s, 1e-12).max_relative() <= 1e-12);
    let rt = invert_r_series(&nf);
    assert!(verify_inverse(&nf, &rt, 1e-12).max_relative() <= 1e-12);
    let rep = verify_inverse_reduction(&nf, &rt, &s, 1e-12);
    assert!(rep.max_relative() <= 1e-12);
    assert_eq!(rep.lowest_nonzero_degree, None);
}

#[test]
fn time_free_a4_only_corrects_through_a2() {
    // a*_4 = 5 d_x^4 has no time part, so R_2 = 0 and a~_4 = a*_4.
    let mut s = hand_series();
    s[2] = HomogenizedPoly::from_terms(1, [(m(0, 4), 5.0)]);
    let nf = compute_normal_form(&s, 1).unwrap();
    assert!(nf.r[0].is_zero());
    assert_eq!(nf.a_tilde[0], s[2]);
    assert!(verify_reduction(&nf, &s, 1e-12).max_relative() <= 1e-12);
}

#[test]
fn scalar_geometric_inverse() {
    let a2 = HomogenizedPoly::from_terms(1, [(m(0, 2), -1.0)]);
    let nf = NormalForm {
        k: 2,
        dim: 1,
        rho_bar: 1.0,
        a2,
        r: vec![HomogenizedPoly::from_terms(1, [(m(2, 0), -1.0)]), HomogenizedPoly::zero(1)],
        a_tilde: vec![HomogenizedPoly::zero(1), HomogenizedPoly::zero(1)],
        dropped_odd: 0.0,
    };
    let rt = invert_r_series(&nf);
    assert_eq!(rt[0], HomogenizedPoly::from_terms(1, [(m(2, 0), 1.0)]));
    assert_eq!(rt[1], HomogenizedPoly::from_terms(1, [(m(4, 0), 1.0)]));
}

#[test]
fn two_phase_identities_through_k4() {
    let s = medium_series("two_phase(1,4,0.5,0.1)", 4);
    for k in 1..=4 {
        let nf = compute_normal_form(&s, k).unwrap();
        let tol = 1e-11;
        assert!(verify_reduction(&nf, &s, tol).max_relative() <= tol, "k = {k}");
        let rt = invert_r_series(&nf);
        assert!(verify_inverse(&nf, &rt, tol).max_relative() <= tol, "k = {k}");
        let rep = verify_inverse_reduction(&nf, &rt, &s, tol);
        assert!(rep.max_relative() <= tol, "k = {k}");
        assert_eq!(rep.lowest_nonzero_degree, None);
        for (j, a) in nf.a_tilde.iter().enumerate() {
            assert!(a.is_time_free());
            assert!(a.terms().keys().all(|b| b.order() as usize == 2 * j + 4));
        }
        for (j, r) in nf.r.iter().enumerate() {
            assert!(r.terms().keys().all(|b| b.order() as usize == 2 * j + 2));
        }
    }
}

#[test]
fn constant_medium_reduces_to_a2() {
    let s = medium_series("constant(1.3)", 2);
    let nf = compute_normal_form(&s, 2).unwrap();
    assert!(nf.r.iter().all(|r| r.is_zero()));
    assert!(nf.a_tilde.iter().all(|a| a.is_zero()));
    assert_eq!(nf.reduced_operator(), s[0]);
}

#[test]
fn elimination_is_deterministic() {
    let s = medium_series("random_smooth_rho(4)", 2);
    let a = compute_normal_form(&s, 2).unwrap();
    let mut perturbed = s.clone();
    perturbed[2] = perturbed[2].add(&HomogenizedPoly::from_terms(1, [(m(2, 2), 0.25)]));
    let _ = compute_normal_form(&perturbed, 2).unwrap();
    let b = compute_normal_form(&s, 2).unwrap();
    assert_eq!(a.r, b.r);
    assert_eq!(a.a_tilde, b.a_tilde);
    assert_eq!(a.dump(), b.dump());
}

#[test]
fn degenerate_a2_is_rejected() {
    let s = vec![HomogenizedPoly::from_terms(1, [(m(0, 2), -1.0)])];
    assert!(matches!(compute_normal_form(&s, 0), Err(Error::DegenerateA2(_))));
    assert!(matches!(compute_normal_form(&hand_series(), 2), Err(Error::TableTooShallow { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_series_satisfy_the_identities(
        rho in 0.5f64..2.0,
        abar in 0.5f64..3.0,
        c4 in prop::collection::vec(-2.0f64..2.0, 3),
        c6 in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let s = vec![
            HomogenizedPoly::from_terms(1, [(m(2, 0), rho), (m(0, 2), -abar)]),
            HomogenizedPoly::zero(1),
            HomogenizedPoly::from_terms(1, [(m(4, 0), c4[0]), (m(2, 2), c4[1]), (m(0, 4), c4[2])]),
            HomogenizedPoly::zero(1),
            HomogenizedPoly::from_terms(1, [(m(6, 0), c6[0]), (m(4, 2), c6[1]), (m(2, 4), c6[2]), (m(0, 6), c6[3])]),
        ];
        let nf = compute_normal_form(&s, 2).unwrap();
        let tol = 1e-11;
        prop_assert!(verify_reduction(&nf, &s, tol).max_relative() <= tol);
        let rt = invert_r_series(&nf);
        prop_assert!(verify_inverse(&nf, &rt, tol).max_relative() <= tol);
        prop_assert!(verify_inverse_reduction(&nf, &rt, &s, tol).max_relative() <= tol);
        prop_assert!(nf.a_tilde.iter().all(|a| a.is_time_free()));
    }
}
