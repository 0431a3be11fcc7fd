//! Thin wrappers over the `quadrature` crate used by the Orlicz calculus and
//! by the exact moments of the error-field generators.

use quadrature::double_exponential;

/// Integral of `f` over `[a, b]`, split into `pieces` equal panels so that
/// sharply peaked integrands are resolved.
pub(crate) fn integrate<F>(f: F, a: f64, b: f64, pieces: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return 0.0;
    }
    let width = (b - a) / pieces as f64;
    (0..pieces)
        .map(|k| {
            let lo = a + width * k as f64;
            let hi = if k + 1 == pieces { b } else { lo + width };
            double_exponential::integrate(&f, lo, hi, 1e-14 * (hi - lo)).integral
        })
        .sum()
}

/// `E f(mean + sigma Z)` for standard normal `Z`.
pub(crate) fn gaussian_expectation<F>(f: F, mean: f64, sigma: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if sigma == 0.0 {
        return f(mean);
    }
    let density = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    integrate(|z| f(mean + sigma * z) * density(z), -12.0, 12.0, 48)
}
