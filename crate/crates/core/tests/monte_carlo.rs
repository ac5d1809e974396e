//! Small-budget Monte Carlo checks of the estimators against their exact
//! means. Seeds are fixed, so these are deterministic.

use silt_core::asymptotics::{
    expected_occupation_at_start, occupation_in_ball, sample_alpha, sample_beta, sample_c_n,
    BatchSpec, Sequential,
};
use silt_core::path::generate_path;
use silt_core::silt::{expected_alpha_eps, expected_c_n, grid_centering, centering_term};
use silt_core::stats::Summary;
use silt_core::MollifierScale;

fn spec(seed: u64, n: u64, dt: f64, e: f64) -> BatchSpec {
    BatchSpec::new(seed, n, dt, MollifierScale::new(e).unwrap()).unwrap()
}

#[test]
fn alpha_mean_matches_finite_eps_formula() {
    let s = spec(1, 1500, 1.0 / 64.0, 1.0 / 8.0);
    let sample = sample_alpha(&Sequential, &s, 1.0, 1.0).unwrap();
    let sum = Summary::of(&sample).unwrap();
    let exact = expected_alpha_eps(1.0, 1.0, s.eps).unwrap();
    assert!(sum.z_score(exact) < 4.0, "{sum:?} vs {exact}");
}

#[test]
fn beta_is_centered() {
    let s = spec(2, 2000, 1.0 / 64.0, 1.0 / 8.0);
    let sample = sample_beta(&Sequential, &s, 1.0).unwrap();
    let sum = Summary::of(&sample).unwrap();
    // residual grid bias is known exactly
    let bias = grid_centering(64, s.dt, s.eps).unwrap() - centering_term(1.0, s.eps).unwrap();
    assert!(sum.z_score(bias) < 4.0, "{sum:?} bias {bias}");
}

#[test]
fn c_n_means_track_their_exact_values() {
    let s = spec(3, 400, 1.0 / 32.0, 1.0 / 8.0);
    let prefixes = sample_c_n(&Sequential, &s, 3).unwrap();
    for n in 2..=3 {
        let v: Vec<f64> = prefixes.iter().map(|p| p[n - 1]).collect();
        let sum = Summary::of(&v).unwrap();
        let exact = expected_c_n(n, Some(s.eps));
        assert!(sum.z_score(exact) < 4.0, "n={n}: {sum:?} vs {exact}");
    }
}

#[test]
fn occupation_at_start_follows_the_log_corrected_area_law() {
    let n = 400u64;
    let dt = 1.0 / 1024.0;
    let paths: Vec<_> = (0..n).map(|s| generate_path(100 + s, dt, 1024).unwrap()).collect();
    let mut ratios = Vec::new();
    for k in 1..=5 {
        let r = 0.5f64.powi(k);
        let v: Vec<f64> = paths
            .iter()
            .map(|p| occupation_in_ball(p, [0.0, 0.0], r, 1.0).unwrap())
            .collect();
        let sum = Summary::of(&v).unwrap();
        let exact = expected_occupation_at_start(r).unwrap();
        assert!(sum.z_score(exact) < 4.0, "r={r}: {sum:?} vs {exact}");
        // r²(1 + log⁺(1/r)) shape
        ratios.push(exact / (r * r * (1.0 + (1.0 / r).ln().max(0.0))));
    }
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 2.0, "{ratios:?}");
}
