use std::f64::consts::{PI, SQRT_2};

/// Standard normal CDF, `Φ(x) = erfc(−x/√2)/2`.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Density of `N(0, variance)`.
pub fn pdf(x: f64, variance: f64) -> f64 {
    (-0.5 * x * x / variance).exp() / (2.0 * PI * variance).sqrt()
}
