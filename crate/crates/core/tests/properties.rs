use covad_core::advertising::{equilibrium, find_c2, AdvertParams};
use covad_core::covert::{dep, CovertLinkParams};
use covad_core::fading::{AlphaMuParams, FisherFParams};
use covad_core::numerics::{gauss_2f1, integrate_interval, reg_lower_gamma, upper_incomplete_gamma_reg, QuadratureSpec};
use covad_core::uplink::{avg_ber, Modulation, UplinkParams};
use proptest::prelude::*;

fn advert(pi: f64, h_a: f64, eta1: f64, eta2: f64, x0: f64) -> AdvertParams {
    AdvertParams {
        pi,
        h_a,
        eta1,
        eta2,
        x0,
        t1: 5.0,
        n_budget: 20.0,
        p_l: 0.4,
        b_total: 10.0,
        m_saturation: 2.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incomplete_gamma_halves_sum_to_one(a in 0.05f64..40.0, x in 0.0f64..80.0) {
        let s = reg_lower_gamma(a, x).unwrap() + upper_incomplete_gamma_reg(a, x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hypergeometric_matches_euler_integral(a in 0.2f64..3.0, b in 1.0f64..4.0, extra in 1.0f64..4.0, z in -5.0f64..0.9) {
        let c = b + extra;
        let spec = QuadratureSpec::new(1e-14, 1e-11, 4000).unwrap();
        let integral = integrate_interval(
            |t| t.powf(b - 1.0) * (1.0 - t).powf(c - b - 1.0) * (1.0 - z * t).powf(-a),
            0.0,
            1.0,
            &spec,
        )
        .unwrap()
        .value;
        let ln_beta = covad_core::numerics::ln_beta(b, c - b);
        let expected = integral / ln_beta.exp();
        let got = gauss_2f1(a, b, c, z).unwrap();
        prop_assert!((got - expected).abs() <= 1e-7 * expected.abs().max(1e-300), "{got} vs {expected}");
    }

    #[test]
    fn fading_cdfs_are_monotone(alpha in 0.5f64..4.0, mu in 0.3f64..5.0, m in 0.5f64..6.0, ms in 1.1f64..8.0,
                                mean in 0.1f64..10.0, x in 0.0f64..20.0, dx in 1e-6f64..5.0) {
        let am = AlphaMuParams::new(alpha, mu, mean).unwrap();
        let ff = FisherFParams::new(m, ms, mean).unwrap();
        for (lo, hi) in [(am.cdf(x).unwrap(), am.cdf(x + dx).unwrap()), (ff.cdf(x).unwrap(), ff.cdf(x + dx).unwrap())] {
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            prop_assert!(hi >= lo - 1e-14);
        }
    }

    #[test]
    fn detection_components_are_probabilities(p_a in 0.1f64..20.0, p_j in 0.0f64..50.0, eps_over in 0.0f64..30.0) {
        let p = CovertLinkParams {
            p_a,
            p_j,
            sigma2_aw: 0.1,
            sigma2_ak_per_hz: 4e-21,
            h_jw: AlphaMuParams::new(2.0, 2.0, 3.0).unwrap(),
            h_aw: FisherFParams::new(3.0, 2.0, 1.0).unwrap(),
            h_jk: AlphaMuParams::new(2.0, 2.0, 3.0).unwrap(),
            h_ak: FisherFParams::new(3.0, 2.0, 1.0).unwrap(),
            delta: 0.03,
        };
        let d = dep(&p, 0.1 + eps_over).unwrap();
        prop_assert!((0.0..=1.0).contains(&d.false_alarm));
        prop_assert!((0.0..=1.0).contains(&d.miss_detection));
        prop_assert_eq!(d.dep, d.false_alarm + d.miss_detection);
    }

    #[test]
    fn ber_falls_with_power(m in 0.5f64..6.0, ms in 1.5f64..8.0, dbw in -10.0f64..20.0) {
        let h_ka = FisherFParams::new(m, ms, 1.0).unwrap();
        for md in Modulation::ALL {
            let at = |d: f64| avg_ber(&UplinkParams { p_k: 10f64.powf(d / 10.0), sigma2_ka: 1.0, h_ka }, md).unwrap();
            let (lo, hi) = (at(dbw), at(dbw + 1.0));
            prop_assert!(hi < lo && lo <= 0.5);
        }
    }

    #[test]
    fn equilibrium_share_is_interior(pi in 0.1f64..50.0, h_a in 0.1f64..10.0, eta1 in 0.05f64..5.0,
                                     eta2 in 0.05f64..5.0, c2 in 0.0f64..10.0) {
        let p = advert(pi, h_a, eta1, eta2, 0.3);
        let eq = equilibrium(&p, c2).unwrap();
        prop_assert!(eq.x_bar > 0.0 && eq.x_bar < 1.0);
        prop_assert!((eq.relaxation_rate(&p) * eq.x_bar - eq.capital_lambda).abs() < 1e-12 * eq.capital_lambda.max(1.0));
        // a costlier budget multiplier lowers the stationary share
        let tighter = equilibrium(&p, c2 + 1.0).unwrap();
        prop_assert!(tighter.x_bar < eq.x_bar);
    }

    #[test]
    fn budget_multiplier_responds_to_budget(n in 4.1f64..30.0) {
        let p = AdvertParams { n_budget: n, ..advert(10.0, 3.0, 2.0, 1.3, 0.3) };
        let loose = find_c2(&AdvertParams { n_budget: n + 5.0, ..p }, 5.0).unwrap();
        let tight = find_c2(&p, 5.0).unwrap();
        prop_assert!(tight.c2 >= loose.c2);
    }

    #[test]
    fn modulation_names_round_trip(i in 0usize..4) {
        let m = Modulation::ALL[i];
        prop_assert_eq!(m.name().to_lowercase().parse::<Modulation>().unwrap(), m);
    }
}
