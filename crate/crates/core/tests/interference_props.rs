use photonic_fusion::interference::{
    antidip_probability, antidip_probability_mismatch, antidip_probability_mismatch_closed, delta_omega_from_lambda,
    expected_counts, fit_antidip, mode_transform_chain, DetectionWindow, TwoPhotonExpr,
};
use photonic_fusion::quantum::Pol;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn antidip_is_even_bounded_and_monotone(s in 0.2f64..5.0, a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let p = |d: f64| antidip_probability(d, s).unwrap();
        prop_assert_eq!(p(a), p(-a));
        prop_assert!((0.125..=0.25).contains(&p(a)));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(p(hi) <= p(lo));
    }

    #[test]
    fn mismatch_only_lowers_the_peak(dl in 0.001f64..0.3, d in -4.0f64..4.0) {
        let w = DetectionWindow::default();
        let m = antidip_probability_mismatch(d, 1.0, dl, 625.0, &w).unwrap();
        prop_assert!(m <= antidip_probability(d, 1.0).unwrap() + 1e-9);
        prop_assert!(m >= 0.125 - 1e-9);
        let closed = antidip_probability_mismatch_closed(d, 1.0, delta_omega_from_lambda(dl, 625.0));
        prop_assert!((m - closed).abs() < 1e-8);
    }

    #[test]
    fn chain_conserves_norm(a in prop::sample::select(vec![Pol::H, Pol::V]), b in prop::sample::select(vec![Pol::H, Pol::V])) {
        let out = mode_transform_chain(&TwoPhotonExpr::product(a, b).unwrap()).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_fit_is_exact(n_av in 10.0f64..1e5, p0 in 0.05f64..1.0, s in 0.5f64..2.0) {
        let pts: Vec<(f64, f64)> = (0..31)
            .map(|i| {
                let d = -5.0 * s + i as f64 * s / 3.0;
                (d, expected_counts(d, n_av, p0, s))
            })
            .collect();
        let fit = fit_antidip(&pts, s).unwrap();
        prop_assert!((fit.p0 - p0).abs() < 1e-8);
        prop_assert!((fit.n_av / n_av - 1.0).abs() < 1e-8);
    }
}
