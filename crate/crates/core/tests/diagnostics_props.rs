mod common;

use archimedean::copula::KendallFunction;
use archimedean::diagnostics::{empirical_kendall, radial_angular_decompose, uniformity_test, Thresholds};
use archimedean::generator::FamilyId;
use archimedean::stats::ks_uniform;
use archimedean::{diagnose, fit_generator, sample_copula_seeded, Generator};
use proptest::prelude::*;

#[test]
fn correct_models_pass_their_own_diagnostics() {
    for (g, d) in [
        (Generator::clayton(0.2).unwrap(), 3),
        (Generator::clayton(-0.3).unwrap(), 3),
        (Generator::discrete_radial(&common::ex45_atoms(), 2).unwrap(), 2),
        (Generator::power_kink(2.0).unwrap(), 2),
    ] {
        let s = sample_copula_seeded(&g, d, common::N, 41, 4).unwrap();
        let rep = diagnose(&g, &s, None).unwrap();
        assert!(rep.pass.all(), "{}: {rep:?}", g.label());
    }
}

#[test]
fn a_wrong_model_fails_the_radial_test() {
    let truth = Generator::clayton(2.0).unwrap();
    let s = sample_copula_seeded(&truth, 2, 10_000, 5, 2).unwrap();
    let rep = diagnose(&Generator::clayton(0.2).unwrap(), &s, None).unwrap();
    assert!(rep.radial_ks >= 0.05, "{}", rep.radial_ks);
    assert!(!rep.pass.radial);
}

#[test]
fn exchangeable_models_keep_the_angle_independent_at_d2() {
    // With d = 2, τ(R, V₁) vanishes by symmetry even under a wrong model.
    let truth = Generator::clayton(2.0).unwrap();
    let s = sample_copula_seeded(&truth, 2, 10_000, 6, 2).unwrap();
    let rep = diagnose(&Generator::clayton(0.0).unwrap(), &s, None).unwrap();
    assert!(rep.max_abs_rank_correlation <= Thresholds::for_n(10_000).rank_correlation);
}

#[test]
fn angular_ks_is_the_same_for_v_and_s_at_d2() {
    let g = Generator::clayton(1.0).unwrap();
    let s = sample_copula_seeded(&g, 2, 20_000, 9, 2).unwrap();
    let dec = radial_angular_decompose(&g, &s).unwrap();
    let s1: Vec<f64> = (0..dec.radii.len()).map(|k| dec.angle(k)[0]).collect();
    let ks = uniformity_test(&dec)[0];
    assert!((ks - ks_uniform(&s1)).abs() < 1e-12, "{ks} vs {}", ks_uniform(&s1));
}

#[test]
fn empirical_kendall_tracks_the_model() {
    let g = Generator::clayton(1.0).unwrap();
    let s = sample_copula_seeded(&g, 3, 20_000, 10, 2).unwrap();
    let khat = empirical_kendall(&s).unwrap();
    let dist = khat.distance_to(&KendallFunction::new(&g, 3).unwrap());
    assert!(dist <= 0.02, "{dist}");
}

#[test]
fn fit_objective_is_smallest_near_the_truth() {
    let g = Generator::clayton(1.0).unwrap();
    let s = sample_copula_seeded(&g, 2, 20_000, 11, 2).unwrap();
    let khat = empirical_kendall(&s).unwrap();
    let at = |theta: f64| khat.distance_to(&KendallFunction::new(&Generator::clayton(theta).unwrap(), 2).unwrap());
    assert!(at(1.0) <= at(0.5) && at(1.0) <= at(1.5));
    let fit = fit_generator(FamilyId::Clayton, &s, (0.01, 5.0)).unwrap();
    assert!((fit.value - 1.0).abs() <= 0.1, "{fit:?}");
    assert!(fit.distance <= at(1.0) + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn empirical_kendall_is_a_cdf(seed in any::<u64>(), d in 2usize..5, x in 0.0f64..1.0, dx in 0.0f64..0.5) {
        let g = Generator::clayton(0.8).unwrap();
        let s = sample_copula_seeded(&g, d, 200, seed, 1).unwrap();
        let k = empirical_kendall(&s).unwrap();
        let (a, b) = (k.eval(x), k.eval(x + dx));
        prop_assert!((0.0..=1.0).contains(&a) && b >= a);
        prop_assert_eq!(k.eval(1.0), 1.0);
        prop_assert!(k.eval_left(x) <= a);
    }
}
