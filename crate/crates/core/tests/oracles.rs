mod common;

use common::{
    euler_gamma_from_harmonic, j0_power_series, k1_integral, log_space, product_cdf_integral,
};
use fabc::channel::product_channel_cdf;
use fabc::specfun::{bessel_j0, bessel_k1, euler_mascheroni, k1_small_arg, AccuracyBudget};

fn worst_violation(
    points: &[f64],
    f: impl Fn(f64) -> f64,
    oracle: impl Fn(f64) -> f64,
    budget: AccuracyBudget,
) -> Option<(f64, f64, f64)> {
    points.iter().find_map(|&x| {
        let (v, r) = (f(x), oracle(x));
        (!budget.admits(v, r)).then_some((x, v, r))
    })
}

#[test]
fn j0_matches_power_series() {
    let pts = log_space(1e-3, 200.0, 1000);
    let bad = worst_violation(
        &pts,
        |x| bessel_j0(x).unwrap(),
        j0_power_series,
        AccuracyBudget::default(),
    );
    assert!(bad.is_none(), "J0 outside budget at {bad:?}");
}

#[test]
fn k1_matches_integral() {
    let pts = log_space(1e-6, 700.0, 1000);
    let bad = worst_violation(
        &pts,
        |x| bessel_k1(x).unwrap(),
        k1_integral,
        AccuracyBudget::default(),
    );
    assert!(bad.is_none(), "K1 outside budget at {bad:?}");
}

#[test]
fn oracle_reference_values() {
    assert!((j0_power_series(std::f64::consts::PI) + 0.304_242_177_644_093_9).abs() < 1e-15);
    assert!((k1_integral(1.0) - 0.601_907_230_197_234_6).abs() < 1e-15);
    assert!((k1_integral(2.0) - 0.139_865_881_816_522_4).abs() < 1e-15);
}

#[test]
fn j0_first_zero_by_bisection_on_oracle() {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if j0_power_series(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!(lo > 2.40 && hi < 2.41);
    assert!(bessel_j0(lo - 1e-9).unwrap() > 0.0 && bessel_j0(hi + 1e-9).unwrap() < 0.0);
}

#[test]
fn euler_constant_from_harmonic_numbers() {
    let g = euler_gamma_from_harmonic(20);
    assert!((g - euler_mascheroni()).abs() < 1e-15, "{g}");
    let e = (-euler_mascheroni()).exp();
    assert!(e > 0.561 && e < 0.562);
}

#[test]
fn small_argument_expansion_tracks_k1() {
    let rel = |r: f64| (k1_small_arg(r).unwrap() - k1_integral(r)).abs() / k1_integral(r);
    assert!(rel(0.01) < 1e-4);
    assert!(rel(0.1) < 1e-2);
    // calibrated once: the neglected term is O(r³ log r), so relative error
    // scales like r⁴|log r|; C = 0.1 leaves a wide margin under r²|log r|
    for r in log_space(1e-4, 0.1, 60) {
        assert!(rel(r) <= 0.1 * r * r * r.ln().abs(), "r = {r}");
    }
}

#[test]
fn product_cdf_matches_integral() {
    let budget = AccuracyBudget::new(1e-11, 1e-14).unwrap();
    for r in log_space(1e-4, 50.0, 300) {
        let (v, o) = (product_channel_cdf(r).unwrap(), product_cdf_integral(r));
        assert!(budget.admits(v, o), "r = {r}: {v} vs {o}");
    }
    assert!((product_channel_cdf(1.0).unwrap() - 0.720_268).abs() < 1e-6);
}
