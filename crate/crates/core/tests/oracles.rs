mod common;

use rare_events::special::{normal_upper_tail, normal_upper_tail_inv};
use rare_events::{
    mcs_estimate, posterior_density, predicted_mcs_cov, relative_efficiency, ss_cov_model, CovModelParams,
    GaussianTailModel, PosteriorBeta, RareEventSpec, SsConfig,
};

#[test]
fn quadrature_tail_matches_library_tail() {
    // Reference digits from a 40-digit evaluation of the normal CDF.
    let reference = [
        (2.0, 0.022_750_131_948_179_21),
        (3.0, 1.349_898_031_630_094_5e-3),
        (4.0, 3.167_124_183_311_992e-5),
    ];
    for (beta, q) in reference {
        let oracle = common::tail(beta);
        assert!((oracle / q - 1.0).abs() < 1e-10, "quadrature at {beta}: {oracle}");
        assert!((normal_upper_tail(beta) / oracle - 1.0).abs() < 1e-9);
    }
    for p in [0.3, 1e-3, 1e-8] {
        let x = normal_upper_tail_inv(p);
        assert!((common::tail(x) / p - 1.0).abs() < 1e-8);
    }
}

#[test]
fn exact_probability_of_tail_model() {
    let model = GaussianTailModel::new(7, 2.0).unwrap();
    assert!((model.exact_probability() - 0.02275).abs() < 1e-5);
}

#[test]
fn mcs_on_tail_model_is_within_five_predicted_covs() {
    let model = GaussianTailModel::new(10, 2.0).unwrap();
    let spec = RareEventSpec::new(2.0, 1).unwrap();
    let n = 100_000;
    let r = mcs_estimate(&model, &spec, n, 2024).unwrap();
    let p = common::tail(2.0);
    let delta = predicted_mcs_cov(p, n).unwrap();
    assert!((r.p_hat / p - 1.0).abs() < 5.0 * delta, "p_hat {}", r.p_hat);
}

#[test]
fn posterior_density_integrates_to_one() {
    for (n_event, n) in [(0u64, 0u64), (0, 10), (3, 10), (10, 10), (1, 2), (34, 10_000), (500, 1000)] {
        let post = PosteriorBeta::from_counts(n_event, n).unwrap();
        let f = |p: f64| posterior_density(p, &post).unwrap();
        // Split at the mode so narrow peaks are resolved.
        let mode = if n > 0 { n_event as f64 / n as f64 } else { 0.5 };
        let total = common::adaptive_simpson(&f, 0.0, mode, 1e-12) + common::adaptive_simpson(&f, mode, 1.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-9, "({n_event}, {n}) integrates to {total}");
    }
}

#[test]
fn beta22_density_by_hand() {
    // Beta(2, 2) density is 6 p (1 - p).
    let post = PosteriorBeta::from_counts(1, 2).unwrap();
    for p in [0.1, 0.5, 0.9] {
        assert!((posterior_density(p, &post).unwrap() - 6.0 * p * (1.0 - p)).abs() < 1e-12);
    }
}

#[test]
fn cov_model_at_one_in_a_million() {
    let cfg = SsConfig::new(1000, 0.1).unwrap();
    let params = CovModelParams::default();
    let d = ss_cov_model(1e-6, &cfg, 10_000, &params).unwrap();
    let expected = 4.0 * 0.9 / (1000.0 * 10f64.ln().powi(2)) * 1e6f64.ln().powi(2);
    assert!((d * d / expected - 1.0).abs() < 1e-12);
    // (ln 1e6 / ln 10)^2 = 36 exactly.
    assert!((d * d - 4.0 * 0.9 * 36.0 / 1000.0).abs() < 1e-12);
}

#[test]
fn relative_efficiency_values() {
    let cfg = SsConfig::new(1000, 0.1).unwrap();
    let params = CovModelParams::default();
    let eta = relative_efficiency(1e-6, &cfg, &params).unwrap();
    // 0.1 / (3.6e-6 * 36) from exact arithmetic.
    assert!((eta - 0.1 / (3.6e-6 * 36.0)).abs() < 1e-9 * eta);
    assert!((750.0..=850.0).contains(&eta));
    let approx = 0.03 / (1e-6 * 36.0);
    assert!((eta / approx - 1.0).abs() < 0.1);
    let mut prev = 0.0;
    for k in 2..=12 {
        let eta = relative_efficiency(10f64.powi(-k), &cfg, &params).unwrap();
        assert!(eta > prev);
        prev = eta;
    }
}
