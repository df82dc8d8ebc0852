//! Comparisons against independently computed reference values.

use concmeter_core::measures::gamma::{gamma_cdf, gamma_quantile};
use concmeter_core::parameters::beta_tilde;
use concmeter_core::{sample, MeasureSpec, NormSpec};
use statrs::distribution::{Continuous, ContinuousCDF, Gamma, Normal};
use statrs::function::gamma::ln_gamma;

#[test]
fn gamma_cdf_matches_statrs() {
    for &a in &[0.25, 0.5, 1.0, 2.5, 8.0, 32.0, 256.0] {
        let reference = Gamma::new(a, 1.0).unwrap();
        for &x in &[1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 40.0, 300.0] {
            let got = gamma_cdf(a, x).unwrap();
            let want = reference.cdf(x);
            assert!((got - want).abs() <= 1e-10 + 1e-9 * want, "P({a}, {x}): {got} vs {want}");
        }
    }
}

#[test]
fn gamma_quantile_inverts_statrs_cdf() {
    for &a in &[0.5, 4.0, 64.0] {
        let reference = Gamma::new(a, 1.0).unwrap();
        for &u in &[1e-6, 0.01, 0.5, 0.9, 0.999] {
            let x = gamma_quantile(a, u);
            assert!((reference.cdf(x) - u).abs() < 1e-9 * u.max(1e-3), "a={a} u={u}");
        }
    }
}

/// `E max_i |g_i|` for `n` standard normals by trapezoidal quadrature of the survival function.
fn expected_max_abs(n: usize) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let h = 1e-4;
    let tail = |t: f64| 1.0 - (2.0 * normal.cdf(t) - 1.0).powi(n as i32);
    let steps = (12.0 / h) as usize;
    (0..steps).map(|i| 0.5 * h * (tail(i as f64 * h) + tail((i + 1) as f64 * h))).sum()
}

/// `E‖g‖_2` for a standard Gaussian vector.
fn expected_euclidean(n: usize) -> f64 {
    (2f64.ln() / 2.0 + ln_gamma((n as f64 + 1.0) / 2.0) - ln_gamma(n as f64 / 2.0)).exp()
}

#[test]
fn beta_tilde_on_sphere_matches_gaussian_quadrature() {
    for n in [16usize, 64] {
        let batch = sample(&MeasureSpec::cone_surface(NormSpec::l2(n)).unwrap(), 50_000, 4).unwrap();
        // Radius and direction of a Gaussian vector are independent, so
        // E‖θ‖ = E‖g‖/E‖g‖_2 for θ uniform on the sphere.
        let linf = beta_tilde(&batch, &NormSpec::l2(n), &NormSpec::linf(n)).unwrap().value;
        let want = expected_euclidean(n) / expected_max_abs(n);
        assert!((linf / want - 1.0).abs() < 0.01, "linf n={n}: {linf} vs {want}");

        let l1 = beta_tilde(&batch, &NormSpec::l2(n), &NormSpec::l1(n)).unwrap().value;
        let mean_abs = 2.0 * Normal::new(0.0, 1.0).unwrap().pdf(0.0);
        let want = (n as f64).sqrt() * expected_euclidean(n) / (n as f64 * mean_abs);
        assert!((l1 / want - 1.0).abs() < 0.005, "l1 n={n}: {l1} vs {want}");
    }
}

#[test]
fn quadrature_sanity() {
    assert!((expected_max_abs(1) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-7);
    assert!((expected_euclidean(1) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
    assert!((expected_euclidean(2) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
}
