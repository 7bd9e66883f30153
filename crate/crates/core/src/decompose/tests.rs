use super::*;
use crate::algebra::MonomialBasis;
use crate::labels::reconstruct;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn gaussian_form(n: usize, d: usize, rng: &mut ChaCha8Rng) -> HomogeneousForm {
    let len = MonomialBasis::new(n + 1, d).len();
    let c: Vec<f64> = (0..len).map(|_| gaussian(rng)).collect();
    HomogeneousForm::from_real_dense(n, d, &c).unwrap()
}

fn planted(n: usize, d: usize, template: Label, rng: &mut ChaCha8Rng) -> HomogeneousForm {
    let lay = Layout::new(n + 1, template);
    let mut x = random_points(&lay, rng);
    for i in lay.coeff_range() {
        x[i] = gaussian(rng);
    }
    form_from_parameters(n, d, template, &x).unwrap()
}

fn check_success(f: &HomogeneousForm, dec: &Decomposition) {
    assert_eq!(dec.set.label(), dec.template);
    let g = reconstruct(&dec.set, &dec.certificate, f.d()).unwrap();
    assert!(g.relative_distance(f) <= 1e-6);
}

#[test]
fn generic_rank_values() {
    assert_eq!(generic_rank(1, 3).g, 2);
    assert_eq!(generic_rank(2, 5).g, 7);
    assert!(generic_rank(2, 5).flags.is_empty());
    assert!(generic_rank(2, 6).flags.contains(&GenericRankFlag::ListedException));
    assert!(generic_rank(2, 4).flags.contains(&GenericRankFlag::Defective));
    assert_eq!(generic_rank(2, 4).g, 5);
    assert!(generic_rank(1, 2).flags.contains(&GenericRankFlag::OutsideHypotheses));
}

#[test]
fn template_enumeration_order() {
    let w4: Vec<_> = templates_for_weight(4, false).iter().map(|t| (t.a(), t.b())).collect();
    assert_eq!(w4, vec![(0, 4), (1, 2), (2, 0)]);
    let w4: Vec<_> = templates_for_weight(4, true).iter().map(|t| (t.a(), t.b())).collect();
    assert_eq!(w4, vec![(1, 2), (2, 0)]);
    let j: Vec<_> = join_templates(6).iter().map(|(_, t)| (t.a(), t.b())).collect();
    assert_eq!(j, vec![(1, 5), (2, 3), (3, 1)]);
}

#[test]
fn filter_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = ProjectivePoint::real(&[1.0, -0.5, 2.0]).unwrap();
    let ell = crate::algebra::power_of_linear_form(&p, 5).unwrap();
    assert_eq!(secant_membership_filter(&ell, 1, &tol()), SecantFilter::Possible);
    let sextic = gaussian_form(1, 6, &mut rng);
    assert_eq!(secant_membership_filter(&sextic, 2, &tol()), SecantFilter::Impossible);
    let quintic = gaussian_form(2, 5, &mut rng);
    assert_eq!(secant_membership_filter(&quintic, 3, &tol()), SecantFilter::Impossible);
    assert_eq!(secant_membership_filter(&quintic, 6, &tol()), SecantFilter::Possible);
}

#[test]
fn recovers_sum_of_two_cubes() {
    let f = HomogeneousForm::from_real_dense(1, 3, &[1.0, 0.0, 0.0, 1.0]).unwrap();
    let problem = DecompositionProblem::new(f.clone(), Label::new(0, 2).unwrap(), NLSConfig::default()).unwrap();
    let dec = decompose_with_template(&problem, &tol()).unwrap();
    check_success(&f, &dec);
    let e0 = ProjectivePoint::real(&[1.0, 0.0]).unwrap();
    let e1 = ProjectivePoint::real(&[0.0, 1.0]).unwrap();
    for p in dec.set.real_points() {
        assert!(p.distance(&e0) < 1e-8 || p.distance(&e1) < 1e-8);
    }
}

#[test]
fn single_pair_templates_on_cubics() {
    let f = HomogeneousForm::from_real_dense(1, 3, &[1.0, 0.0, -3.0, 0.0]).unwrap();
    let problem = DecompositionProblem::new(f.clone(), Label::new(1, 0).unwrap(), NLSConfig::default()).unwrap();
    let dec = decompose_with_template(&problem, &tol()).unwrap();
    check_success(&f, &dec);

    let f = HomogeneousForm::from_real_dense(1, 3, &[1.0, 0.0, 0.0, 1.0]).unwrap();
    let problem = DecompositionProblem::new(f, Label::new(1, 0).unwrap(), NLSConfig::default()).unwrap();
    assert!(matches!(decompose_with_template(&problem, &tol()), Err(Error::Decomposition(_))));
}

#[test]
fn weight_three_on_quintic_is_filtered() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = gaussian_form(2, 5, &mut rng);
    let problem = DecompositionProblem::new(f, Label::new(1, 1).unwrap(), NLSConfig::default()).unwrap();
    match decompose_with_template(&problem, &tol()) {
        Err(Error::Decomposition(r)) => assert_eq!(r.filtered.len(), 1),
        other => panic!("expected a filtered failure, got {other:?}"),
    }
}

#[test]
fn planted_two_three_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = Label::new(2, 3).unwrap();
    let f = planted(2, 5, t, &mut rng);
    let problem = DecompositionProblem::new(f.clone(), t, NLSConfig::default()).unwrap();
    let dec = decompose_with_template(&problem, &tol()).unwrap();
    check_success(&f, &dec);
}

#[test]
fn binary_quintic_weight_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = gaussian_form(1, 5, &mut rng);
    let dec = decompose_weight(&f, 3, false, &NLSConfig::default(), &tol()).unwrap();
    check_success(&f, &dec);
    let (sylvester, _) = crate::binary::sylvester_decompose(&f, &tol()).unwrap();
    assert_eq!(sylvester.label(), dec.set.label());
    assert!(matches!(decompose_weight(&f, 1, false, &NLSConfig::default(), &tol()), Err(Error::Decomposition(_))));
}

#[test]
fn join_on_binary_septic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = gaussian_form(1, 7, &mut rng);
    let dec = join_decompose(&f, 4, &NLSConfig::default(), &tol()).unwrap();
    check_success(&f, &dec);
    assert_eq!(dec.set.label().weight(), 5);
    assert!(dec.set.label().a() >= 1);
}

#[test]
fn join_returns_smaller_label_when_available() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = planted(2, 5, Label::new(1, 3).unwrap(), &mut rng);
    let dec = join_decompose(&f, 6, &NLSConfig::default(), &tol()).unwrap();
    check_success(&f, &dec);
    assert_eq!(dec.set.label().weight(), 5);
}

#[test]
fn conjugate_only_flags_small_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = planted(1, 3, Label::new(2, 0).unwrap(), &mut rng);
    let dec = conjugate_only_decompose(&f, 2, &NLSConfig::default(), &tol()).unwrap();
    check_success(&f, &dec);
    assert!(dec.set.real_points().is_empty());
    assert_eq!(dec.flags.len(), 1);
    assert!(conjugate_only_decompose(&f, 3, &NLSConfig::default(), &tol()).is_err());
}

#[test]
fn accepted_steps_never_increase_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let f = gaussian_form(2, 4, &mut rng);
        let obj = Objective::new(&f, Label::new(2, 1).unwrap()).unwrap();
        let x0 = random_start(&obj, &mut rng).unwrap();
        let out = levenberg_marquardt(&obj, x0, &NLSConfig::default()).unwrap();
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
    }
}
