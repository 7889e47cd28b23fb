//! Independent reference values used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use stochvortex::Vec2;

/// `exp(-sqrt(1+|y|²))` normalized by direct radial quadrature, not by the
/// library constant.
pub fn mollifier_normalizer() -> f64 {
    let f = |r: f64| 2.0 * PI * r * (-(1.0 + r * r).sqrt()).exp();
    1.0 / simpson(f, 0.0, 60.0, 200_000)
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Mass of `V^N` inside the disc of radius `r`.
pub fn enclosed_mass(beta: f64, n: usize, r: f64) -> f64 {
    let c = mollifier_normalizer();
    let s = (n as f64).powf(beta / 2.0);
    // substitute u = s * radius
    let f = |u: f64| 2.0 * PI * u * c * (-(1.0 + u * u).sqrt()).exp();
    simpson(f, 0.0, s * r, 20_000)
}

/// `(K * V^N)(z)` for the radial `V^N`: a point vortex carrying the mass
/// enclosed by `|z|`.
pub fn mollified_kernel(beta: f64, n: usize, z: Vec2) -> Vec2 {
    let r2 = z.norm_sq();
    let m = enclosed_mass(beta, n, r2.sqrt());
    Vec2::new(-z.x2, z.x1) * (m / (2.0 * PI * r2))
}

/// `exp(-|x-m|²/(2v))/(2πv)`.
pub fn gaussian(x: Vec2, mean: Vec2, variance: f64) -> f64 {
    (-(x - mean).norm_sq() / (2.0 * variance)).exp() / (2.0 * PI * variance)
}
