//! Thin wrappers over `statrs` special functions.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use statrs::function::erf::erfc;
use statrs::function::gamma;

/// Standard normal CDF, computed through `erfc` so both tails keep full
/// relative accuracy.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, `p` in (0, 1).
pub fn norm_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn gamma_fn(x: f64) -> f64 {
    gamma::gamma(x)
}

/// Upper-tail probability of a chi-squared variable with `df` degrees of freedom.
pub fn chi2_sf(stat: f64, df: u32) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("df >= 1");
    dist.sf(stat)
}
