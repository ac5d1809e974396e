use proptest::prelude::*;

use silt_core::asymptotics::{
    dyadic_scales, occupation_sup_stat, steps_for, TailCurve, MIN_EXCEEDANCES,
};
use silt_core::estimators::{alpha_hat_on, cross_ilt};
use silt_core::gn::{check_gn_inequality, evaluate_objective, solve_ground_state, gn_constants, RadialProfile};
use silt_core::path::{generate_path, independent_pair, rescale};
use silt_core::silt::{beta_hat, centering_term, decompose, expected_alpha_eps};
use silt_core::stats::{config_fingerprint, ks_two_sample};
use silt_core::{Interval, MollifierScale};

fn eps(e: f64) -> MollifierScale {
    MollifierScale::new(e).unwrap()
}

/// Sorted distinct cut points strictly inside `(0, n)`.
fn cuts(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(1..n, 1..8).prop_map(|s| s.into_iter().collect())
}

fn partition(n: usize, cuts: &[usize]) -> Vec<Interval> {
    let mut bounds = vec![0];
    bounds.extend_from_slice(cuts);
    bounds.push(n);
    bounds
        .windows(2)
        .map(|w| Interval::new(w[0], w[1]).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_reconstructs_beta_hat(seed in any::<u64>(), cuts in cuts(240), e in 0.02f64..0.5) {
        let p = generate_path(seed, 1.0 / 240.0, 240).unwrap();
        let whole = beta_hat(&p, p.full(), eps(e)).unwrap().value;
        let d = decompose(&p, &partition(240, &cuts), eps(e)).unwrap();
        prop_assert!((d.total - whole).abs() <= 1e-12 * whole.abs().max(1.0));
        prop_assert_eq!(d.pieces.len(), cuts.len() + 1);
    }

    #[test]
    fn cross_term_is_symmetric_and_nonnegative(seed in any::<u64>(), cut in 1usize..199, e in 0.01f64..1.0) {
        let p = generate_path(seed, 0.005, 200).unwrap();
        let i = Interval::new(0, cut).unwrap();
        let j = Interval::new(cut, 200).unwrap();
        let a = cross_ilt(&p, i, j, eps(e)).unwrap();
        let b = cross_ilt(&p, j, i, eps(e)).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn beta_hat_depends_only_on_its_piece(seed in any::<u64>(), lo in 0usize..100, len in 1usize..100) {
        let p = generate_path(seed, 0.01, 200).unwrap();
        let iv = Interval::new(lo, lo + len).unwrap();
        let a = beta_hat(&p, iv, eps(0.08)).unwrap().value;
        let q = p.shifted(iv).unwrap();
        let b = beta_hat(&q, q.full(), eps(0.08)).unwrap().value;
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn brownian_scaling_is_pathwise(seed in any::<u64>(), c in prop::sample::select(vec![0.25, 0.5, 2.0, 4.0])) {
        let p = generate_path(seed, 1.0 / 128.0, 128).unwrap();
        let e = eps(1.0 / 16.0);
        let base = beta_hat(&p, p.full(), e).unwrap().value;
        let q = rescale(&p, c).unwrap();
        let scaled = beta_hat(&q, q.full(), e.scaled(c).unwrap()).unwrap().value;
        prop_assert!((scaled - c * base).abs() <= 1e-9 * (c * base).abs().max(1e-3));
    }

    #[test]
    fn alpha_is_additive_in_time(seed in any::<u64>(), cut in 1usize..63) {
        let (x, y) = independent_pair(seed, 1.0 / 64.0, 64, 64).unwrap();
        let e = eps(0.1);
        let full = Interval::new(0, 64).unwrap();
        let whole = alpha_hat_on(&x, full, &y, full, e).unwrap();
        let left = alpha_hat_on(&x, Interval::new(0, cut).unwrap(), &y, full, e).unwrap();
        let right = alpha_hat_on(&x, Interval::new(cut, 64).unwrap(), &y, full, e).unwrap();
        // the shared vertex is counted with weight ½ on each side
        prop_assert!((left + right - whole).abs() <= 1e-12 * whole.max(1e-6));
    }

    #[test]
    fn exact_means_are_monotone(t in 0.1f64..10.0, e1 in 1e-4f64..1.0, ratio in 1.01f64..10.0) {
        let e2 = e1 * ratio;
        prop_assert!(centering_term(t, eps(e1)).unwrap() > centering_term(t, eps(e2)).unwrap());
        prop_assert!(expected_alpha_eps(1.0, t, eps(e1)).unwrap() > expected_alpha_eps(1.0, t, eps(e2)).unwrap());
    }

    #[test]
    fn survival_curves_are_monotone(sample in prop::collection::vec(-5.0f64..5.0, 1..400), mut ts in prop::collection::btree_set(-600i32..600, 1..40)) {
        let ts: Vec<f64> = std::mem::take(&mut ts).into_iter().map(|k| f64::from(k) / 100.0).collect();
        if let Ok(c) = TailCurve::from_sample(&sample, ts, (-5.0, 5.0)) {
            prop_assert!(c.exceed_counts.windows(2).all(|w| w[0] >= w[1]));
            let ls: Vec<f64> = c.log_survival().into_iter().flatten().collect();
            prop_assert!(ls.windows(2).all(|w| w[0] >= w[1]));
            for (q, k) in c.in_fit_window().iter().zip(&c.exceed_counts) {
                prop_assert!(!q || *k >= MIN_EXCEEDANCES);
            }
        }
    }

    #[test]
    fn fingerprint_is_a_pure_function(seed in any::<u64>(), dt in 1e-4f64..1.0, e in 1e-4f64..1.0) {
        let a = config_fingerprint(seed, dt, e, 1.0, "beta");
        prop_assert_eq!(a, config_fingerprint(seed, dt, e, 1.0, "beta"));
        prop_assert_ne!(a, config_fingerprint(seed.wrapping_add(1), dt, e, 1.0, "beta"));
    }

    #[test]
    fn ks_statistic_is_symmetric(a in prop::collection::vec(-3.0f64..3.0, 1..60), b in prop::collection::vec(-3.0f64..3.0, 1..60)) {
        let ab = ks_two_sample(&a, &b).unwrap();
        let ba = ks_two_sample(&b, &a).unwrap();
        prop_assert_eq!(ab.statistic, ba.statistic);
        prop_assert!((0.0..=1.0).contains(&ab.statistic));
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn occupation_statistic_respects_its_cap(seed in any::<u64>(), k in 6u32..10) {
        let dt = 1.0 / f64::from(1u32 << k);
        let p = generate_path(seed, dt, steps_for(1.0, dt).unwrap()).unwrap();
        let s = occupation_sup_stat(&p, 1.0).unwrap();
        let (_, k_max) = dyadic_scales(dt).unwrap();
        prop_assert!(s > 0.0);
        prop_assert!(s <= 2f64.powi(k_max) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Positive mixtures of two Gaussians never beat the ground state.
    #[test]
    fn gn_inequality_on_gaussian_mixtures(w in 0.05f64..1.0, s1 in 0.3f64..3.0, s2 in 0.3f64..3.0, shift in 0.0f64..2.0) {
        let gs = solve_ground_state(1e-12).unwrap();
        let consts = gn_constants(&gs).unwrap();
        let f = move |r: f64| (-(r * r) / (2.0 * s1 * s1)).exp() + w * (-((r - shift).powi(2)) / (2.0 * s2 * s2)).exp();
        let df = move |r: f64| {
            -r / (s1 * s1) * (-(r * r) / (2.0 * s1 * s1)).exp()
                - w * (r - shift) / (s2 * s2) * (-((r - shift).powi(2)) / (2.0 * s2 * s2)).exp()
        };
        let smax = s1.max(s2);
        let profile = RadialProfile::from_fn(smax / 300.0, shift + 10.0 * smax, f, df).unwrap();
        let check = check_gn_inequality(&profile, &consts).unwrap();
        prop_assert!(check.ok, "{check:?}");
        let value = evaluate_objective(&profile).unwrap().value;
        prop_assert!(value <= consts.m + 1e-9);
    }
}
