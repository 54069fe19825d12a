use s2mri::noise::{
    add_noise, chi2, epsilon_squared, normal_quantile, NoiseModel, DEFAULT_PERCENTILE,
};
use s2mri::C64;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

#[test]
fn epsilon_squared_matches_incomplete_gamma_inversion() {
    for m in [1usize, 10, 100, 1000] {
        let exact = ChiSquared::new(2.0 * m as f64)
            .unwrap()
            .inverse_cdf(DEFAULT_PERCENTILE);
        let approx = epsilon_squared(m, DEFAULT_PERCENTILE).unwrap();
        assert!(
            (approx - exact).abs() <= 5e-3 * exact,
            "M'={m}: {approx} vs {exact}"
        );
    }
}

#[test]
fn normal_quantile_matches_reference() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for p in [1e-6, 0.01, 0.02425, 0.3, 0.5, 0.9, 0.99, 0.999_999] {
        let exact = n.inverse_cdf(p);
        assert!(
            (normal_quantile(p) - exact).abs() <= 1e-8 * exact.abs().max(1.0),
            "p={p}"
        );
    }
}

#[test]
fn pure_noise_residuals_fall_inside_the_bound_at_the_nominal_rate() {
    let (m, sigma, draws) = (64usize, 0.3, 10_000u64);
    let eps2 = epsilon_squared(m, DEFAULT_PERCENTILE).unwrap();
    let zeros = vec![C64::new(0.0, 0.0); m];
    let inside = (0..draws)
        .filter(|&seed| {
            let r = add_noise(&zeros, &NoiseModel::new(sigma, seed).unwrap());
            chi2(&r, sigma).unwrap() <= eps2
        })
        .count();
    let rate = inside as f64 / draws as f64;
    assert!((rate - 0.99).abs() <= 0.01, "rate {rate}");
}

#[test]
fn noise_has_the_requested_spread() {
    let zeros = vec![C64::new(0.0, 0.0); 20_000];
    let r = add_noise(&zeros, &NoiseModel::new(0.5, 3).unwrap());
    let var = r.iter().map(|z| z.re * z.re + z.im * z.im).sum::<f64>() / (2.0 * r.len() as f64);
    assert!((var.sqrt() - 0.5).abs() < 0.01);
}
