use waring_labels::binary::curve_weight_bound;
use waring_labels::survey::{survey_labels, survey_labels_with_threads, Distribution, EnsembleSpec, Geometry};
use waring_labels::Label;

fn binary(d: usize, trials: usize, seed: u64) -> EnsembleSpec {
    EnsembleSpec::new(Geometry::Binary { d }, Distribution::GaussianMonomial, trials, seed)
}

#[test]
fn binary_cubic_classes_both_frequent() {
    let h = survey_labels(&binary(3, 10_000, 1)).unwrap();
    assert_eq!(h.failures, 0);
    for label in [Label::new(1, 0).unwrap(), Label::new(0, 2).unwrap()] {
        assert!(h.count(label) * 20 >= h.trials, "{label}: {}", h.count(label));
    }
}

#[test]
fn binary_weight_bound_up_to_degree_ten() {
    for d in 3..=10 {
        for distribution in [Distribution::GaussianMonomial, Distribution::GaussianBombieri] {
            let spec = EnsembleSpec::new(Geometry::Binary { d }, distribution, 1000, 70 + d as u64);
            let h = survey_labels(&spec).unwrap();
            assert_eq!(h.failures, 0, "d = {d}");
            assert!(h.max_weight().unwrap() <= curve_weight_bound(d), "d = {d}");
        }
    }
}

#[test]
fn counts_and_failures_add_up() {
    let spec = EnsembleSpec::new(Geometry::Veronese { n: 2, d: 3 }, Distribution::GaussianBombieri, 12, 3);
    let h = survey_labels(&spec).unwrap();
    assert_eq!(h.counts.iter().map(|c| c.count).sum::<usize>() + h.failures, h.trials);
    assert_eq!(h.metadata.target_weight, Some(h.metadata.generic_rank.as_ref().unwrap().g + 1));
    for c in &h.counts {
        assert_eq!(c.label.weight(), h.metadata.target_weight.unwrap());
        assert!(c.label.a() >= 1);
    }
}

#[test]
fn veronese_survey_is_thread_independent() {
    let spec = EnsembleSpec::new(Geometry::Veronese { n: 2, d: 3 }, Distribution::GaussianMonomial, 8, 5);
    let a = serde_json::to_string(&survey_labels_with_threads(&spec, 1).unwrap()).unwrap();
    let b = serde_json::to_string(&survey_labels_with_threads(&spec, 3).unwrap()).unwrap();
    assert_eq!(a, b);
}
