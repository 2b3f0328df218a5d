use cvqkd::keyrate::{covariance_confidence_bounds, epsilon_budget, ComposableParams, MutualInfoMode};
use cvqkd::subtraction::{subtracted_covariance, SubtractionCorrelation, SubtractionParams};
use cvqkd::sweep::{matched_modes, SchemeKind, Settings};
use cvqkd::Regime;
use proptest::prelude::*;

fn rate(s: &Settings, scheme: SchemeKind, d: f64, v: f64, mu: f64, regime: Regime) -> f64 {
    let sc = s.scenario(scheme, d, v, mu).unwrap();
    s.key_rate(&sc, regime).unwrap().rate
}

fn with_n(s: &Settings, n: f64) -> Settings {
    let mut t = *s;
    t.finite.n_total = n;
    t.composable.n_total = n;
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subtracted_state_is_physical(alpha in 0.05f64..3.0, mu in 0.01f64..0.99, j in 0u32..6) {
        for corr in [SubtractionCorrelation::Gaussian, SubtractionCorrelation::Printed] {
            let cov = subtracted_covariance(alpha, &SubtractionParams::new(mu, j).unwrap(), corr).unwrap();
            let (_, lo) = cov.symplectic_eigenvalues();
            prop_assert!(lo >= 1.0 - 1e-9, "{corr:?}: {cov:?} nu_minus={lo}");
        }
    }

    #[test]
    fn asymptotic_rate_nonincreasing_in_distance(v in 0.1f64..10.0, mu in 0.01f64..0.99, d in 0.0f64..300.0, step in 0.1f64..50.0) {
        let s = Settings::default();
        for scheme in [SchemeKind::FourState, SchemeKind::Proposed] {
            // negative net rates shrink towards zero with eta; only the key is monotone
            let near = rate(&s, scheme, d, v, mu, Regime::Asymptotic).max(0.0);
            let far = rate(&s, scheme, d + step, v, mu, Regime::Asymptotic).max(0.0);
            prop_assert!(far <= near + 1e-15, "{scheme:?}: {near} -> {far}");
        }
    }

    #[test]
    fn finite_rate_monotone_in_n_and_below_asymptotic(v in 0.1f64..10.0, mu in 0.01f64..0.99, d in 0.0f64..250.0, e1 in 8.0f64..16.0, e2 in 8.0f64..16.0) {
        prop_assume!(e1 < e2);
        let s = Settings::default();
        let small = with_n(&s, 10f64.powf(e1));
        let large = with_n(&s, 10f64.powf(e2));
        let k1 = rate(&small, SchemeKind::Proposed, d, v, mu, Regime::Finite);
        let k2 = rate(&large, SchemeKind::Proposed, d, v, mu, Regime::Finite);
        let asym = rate(&s, SchemeKind::Proposed, d, v, mu, Regime::Asymptotic);
        prop_assert!(k1 <= k2);
        prop_assert!(k2.max(0.0) <= asym.max(0.0));
    }

    #[test]
    fn worst_case_holevo_is_pessimistic(v in 0.1f64..10.0, mu in 0.01f64..0.99, d in 0.0f64..250.0, e in 8.0f64..16.0) {
        let s = with_n(&Settings::default(), 10f64.powf(e));
        let sc = s.scenario(SchemeKind::Proposed, d, v, mu).unwrap();
        let nominal = s.key_rate(&sc, Regime::Asymptotic).unwrap().s_eb;
        prop_assert!(s.key_rate(&sc, Regime::Finite).unwrap().s_eb >= nominal - 1e-12);
        prop_assert!(s.key_rate(&sc, Regime::Composable).unwrap().s_eb >= nominal - 1e-12);
    }

    #[test]
    fn composable_below_finite_below_asymptotic(v in 0.1f64..10.0, mu in 0.01f64..0.99, d in 0.0f64..250.0, e in 8.0f64..16.0) {
        let mut s = with_n(&Settings::default(), 10f64.powf(e));
        s.modes = matched_modes(s.modes, MutualInfoMode::Snr);
        s.finite.key_fraction = 1.0 - s.composable.eps_rob;
        let k = |r| rate(&s, SchemeKind::Proposed, d, v, mu, r).max(0.0);
        let (c, f, a) = (k(Regime::Composable), k(Regime::Finite), k(Regime::Asymptotic));
        prop_assert!(c <= f && f <= a, "{c} {f} {a}");
    }

    #[test]
    fn budget_matches_direct_sum(le in -30.0f64..-2.0, ls in -40.0f64..-2.0, lb in -40.0f64..-2.0, lp in -60.0f64..-2.0, lc in -60.0f64..-2.0, ln in -60.0f64..-2.0) {
        let p = ComposableParams {
            eps: 10f64.powf(le),
            eps_sm: 10f64.powf(ls),
            eps_bar: 10f64.powf(lb),
            eps_pe: 10f64.powf(lp),
            eps_cor: 10f64.powf(lc),
            eps_ent: 10f64.powf(ln),
            ..ComposableParams::default()
        };
        let (ok, lhs) = epsilon_budget(&p);
        let terms = [2.0 * p.eps_sm, p.eps_bar, p.eps_pe / p.eps, p.eps_cor / p.eps, p.eps_ent / p.eps];
        let direct: f64 = terms.iter().rev().sum();
        prop_assert!((lhs - direct).abs() <= 1e-12 * direct);
        prop_assert_eq!(ok, lhs <= p.eps);
    }
}

#[test]
fn omega_c_increases_with_block_length() {
    let s = Settings::default();
    let sc = s.scenario(SchemeKind::Proposed, 50.0, 2.0, 0.9).unwrap();
    let cov = cvqkd::channel::propagate(&sc.protocol.prepared_covariance().unwrap(), &sc.channel);
    let omegas: Vec<f64> = (8..=16)
        .map(|e| covariance_confidence_bounds(10f64.powi(e), 1e-41, &cov).unwrap().omega_c_min)
        .collect();
    assert!(omegas.windows(2).all(|w| w[1] > w[0]), "{omegas:?}");
}

#[test]
fn rate_at_block_length_1e4_is_null_for_moderate_mu() {
    let s = with_n(&Settings::default(), 1e4);
    for mu in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for v in [0.5, 2.0, 10.0] {
            assert!(rate(&s, SchemeKind::Proposed, 25.0, v, mu, Regime::Finite) <= 0.0, "mu={mu} v={v}");
        }
    }
}
