//! Bracket for the bounded-Lipschitz (Kantorovich–Rubinstein) distance
//! `‖μ - ν‖₀ = sup { ∫φ d(μ - ν) : |φ| ≤ 1, Lip(φ) ≤ 1 }`.
//!
//! Lower end: best test function from a fixed dictionary. Upper end:
//! `min(2, W₁)` with `W₁` from an exact assignment between samples.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::assignment;
use crate::fields::{GridSampler, ScalarField};
use crate::{Error, Result, Vec2};

pub const MAX_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy)]
pub enum Measure<'a> {
    /// Density on a grid (node weights `f h²`).
    Grid(&'a ScalarField),
    /// Equally weighted atoms.
    Points(&'a [Vec2]),
}

impl Measure<'_> {
    fn integrate(&self, phi: &dyn Fn(Vec2) -> f64) -> f64 {
        match self {
            Measure::Grid(f) => {
                let g = f.geom;
                let m = g.points;
                let mut acc = 0.0;
                for (k, &v) in f.values.iter().enumerate() {
                    if v != 0.0 {
                        acc += v * phi(g.node(k / m, k % m));
                    }
                }
                acc * g.cell_area()
            }
            Measure::Points(p) => p.iter().map(|&x| phi(x)).sum::<f64>() / p.len() as f64,
        }
    }

    fn mean(&self) -> Vec2 {
        let mass = self.integrate(&|_| 1.0);
        Vec2::new(self.integrate(&|x| x.x1), self.integrate(&|x| x.x2)) * (1.0 / mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrOptions {
    pub samples: usize,
    pub repeats: usize,
}

impl Default for KrOptions {
    fn default() -> Self {
        Self { samples: 512, repeats: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrBracket {
    pub lower: f64,
    pub upper: f64,
}

fn clamp1(t: f64) -> f64 {
    t.clamp(-1.0, 1.0)
}

/// Dictionary lower bound.
pub fn kr_lower(a: &Measure, b: &Measure) -> f64 {
    let ma = a.mean();
    let mb = b.mean();
    let c = (ma + mb) * 0.5;
    let diff = ma - mb;
    let mut dirs: Vec<Vec2> = (0..16)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / 16.0;
            Vec2::new(th.cos(), th.sin())
        })
        .collect();
    if diff.norm() > 0.0 {
        dirs.push(diff * (1.0 / diff.norm()));
    }
    let mut best: f64 = 0.0;
    let mut consider = |phi: &dyn Fn(Vec2) -> f64| {
        let v = a.integrate(phi) - b.integrate(phi);
        best = best.max(v.abs());
    };
    for &e in &dirs {
        consider(&|x: Vec2| clamp1(e.dot(x - c)));
        for &w in &[0.5, 1.0, 2.0, 4.0] {
            for &ph in &[0.0, std::f64::consts::FRAC_PI_2] {
                let s = 1.0 / f64::max(w, 1.0);
                consider(&|x: Vec2| s * (w * e.dot(x - c) + ph).sin());
            }
        }
    }
    for &center in &[ma, mb, c] {
        for &r0 in &[0.25, 0.5, 1.0, 2.0, 4.0] {
            consider(&|x: Vec2| (r0 - (x - center).norm()).clamp(0.0, 1.0));
        }
    }
    best.min(2.0)
}

/// Draws `n` points from a measure using the supplied uniforms; points
/// measures are used as given.
fn draw(m: &Measure, uniforms: &[(f64, f64)]) -> Result<Vec<Vec2>> {
    match m {
        Measure::Grid(f) => {
            let s = GridSampler::new(f)?;
            Ok(uniforms.iter().map(|&(u1, u2)| s.sample(u1, u2)).collect())
        }
        Measure::Points(p) => Ok(p.to_vec()),
    }
}

/// Exact `W₁` between two equally sized point sets.
pub fn wasserstein1(x: &[Vec2], y: &[Vec2]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::SampleSize(format!("point sets of sizes {} and {}", x.len(), y.len())));
    }
    let n = x.len();
    let mut cost = Vec::with_capacity(n * n);
    for p in x {
        for q in y {
            cost.push((*p - *q).norm());
        }
    }
    Ok(assignment::solve(&cost, n).0 / n as f64)
}

/// Certified bracket `lower ≤ ‖a - b‖₀ ≤ upper`. Grid measures are sampled
/// with common uniforms so that nearby densities give nearby samples.
pub fn kr_distance<R: Rng + ?Sized>(a: &Measure, b: &Measure, opts: &KrOptions, rng: &mut R) -> Result<KrBracket> {
    let n = match (a, b) {
        (Measure::Points(p), Measure::Points(q)) => {
            if p.len() != q.len() {
                return Err(Error::SampleSize(format!("point sets of sizes {} and {}", p.len(), q.len())));
            }
            p.len()
        }
        (Measure::Points(p), _) | (_, Measure::Points(p)) => p.len(),
        _ => opts.samples,
    };
    if n == 0 || n > MAX_SAMPLES {
        return Err(Error::SampleSize(format!("{n} samples; need 1..={MAX_SAMPLES}")));
    }
    if opts.repeats == 0 {
        return Err(Error::SampleSize("at least one repeat is required".into()));
    }
    let lower = kr_lower(a, b);
    let both_points = matches!((a, b), (Measure::Points(_), Measure::Points(_)));
    let repeats = if both_points { 1 } else { opts.repeats };
    let mut w1 = 0.0;
    for _ in 0..repeats {
        let u: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let x = draw(a, &u)?;
        let y = draw(b, &u)?;
        w1 += wasserstein1(&x, &y)?;
    }
    let upper = (w1 / repeats as f64).min(2.0);
    Ok(KrBracket { lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{GridField, GridGeometry};
    use crate::particles::{stream_rng, StreamPurpose};

    #[test]
    fn two_diracs_collapse_the_bracket() {
        let x = [Vec2::new(0.1, 0.2)];
        let y = [Vec2::new(0.4, 0.6)];
        let mut rng = stream_rng(1, 0, StreamPurpose::Auxiliary);
        let b = kr_distance(&Measure::Points(&x), &Measure::Points(&y), &KrOptions::default(), &mut rng).unwrap();
        assert!((b.lower - 0.5).abs() < 1e-12 && (b.upper - 0.5).abs() < 1e-12, "{b:?}");
    }

    #[test]
    fn mismatched_point_sets_are_rejected() {
        let x = [Vec2::ZERO; 3];
        let y = [Vec2::ZERO; 2];
        let mut rng = stream_rng(1, 0, StreamPurpose::Auxiliary);
        assert!(matches!(
            kr_distance(&Measure::Points(&x), &Measure::Points(&y), &KrOptions::default(), &mut rng),
            Err(Error::SampleSize(_))
        ));
        let g = GridGeometry::centered(2.0, 8).unwrap();
        let f = GridField::from_fn(g, |_| 1.0 / 16.0);
        let opts = KrOptions { samples: 4096, repeats: 1 };
        assert!(kr_distance(&Measure::Grid(&f), &Measure::Grid(&f), &opts, &mut rng).is_err());
    }
}
