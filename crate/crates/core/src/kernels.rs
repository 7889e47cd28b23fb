//! The Biot–Savart kernel `K(x) = x^⊥ / (2π|x|²)`, its bounded antiderivative
//! matrix `K₀`, and the tabulated mollified interaction `K * V^N`.
//!
//! Perp convention: `x^⊥ = (-x2, x1)`, so a positive vortex turns
//! counterclockwise.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fields::{GridField, GridGeometry, VectorField};
use crate::mollifier::{eval_vn, MollifierSpec};
use crate::spectral::{is_nyquist, wavenumbers, Fft2};
use crate::{Error, Mat2, Result, Vec2};

use std::f64::consts::PI;

/// Default bound on the `V^N` mass outside the tabulated box.
pub const TAIL_TOLERANCE: f64 = 1e-10;

pub fn eval_k(x: Vec2) -> Result<Vec2> {
    let r2 = x.norm_sq();
    if r2 == 0.0 || !x.is_finite() {
        return Err(Error::SingularInput(format!("K at ({}, {})", x.x1, x.x2)));
    }
    Ok(x.perp() * (1.0 / (2.0 * PI * r2)))
}

/// `K₀(x) = (1/2π) arctan(x1/x2) I`, whose distributional divergence is `K`.
pub fn eval_k0(x: Vec2) -> Result<Mat2> {
    if x.x2 == 0.0 || !x.is_finite() {
        return Err(Error::SingularInput(format!("K0 on the line x2 = 0 at ({}, {})", x.x1, x.x2)));
    }
    Ok(Mat2::scalar((x.x1 / x.x2).atan() / (2.0 * PI)))
}

/// Fourier multiplier of `K`: `K̂(ξ) = -i ξ^⊥ / |ξ|²` for `f̂(ξ) = ∫ f e^{-iξ·x}`,
/// and zero at `ξ = 0`.
pub fn biot_savart_multiplier(xi1: f64, xi2: f64) -> [Complex64; 2] {
    let k2 = xi1 * xi1 + xi2 * xi2;
    if k2 == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [Complex64::new(0.0, xi2 / k2), Complex64::new(0.0, -xi1 / k2)]
}

/// Coefficients of the square-lattice expansion relating the periodic and
/// planar Biot–Savart kernels on a torus of side `P = 2L`.
///
/// In complex form `u - iv`, the planar kernel is `1/(2πi z)` and
/// `Σ_{ω≠0} ω^{-n}` over `ℤ + iℤ` for `n ≡ 0 mod 4`, from the q-expansion
/// `G_n(τ) = 2ζ(n) + 2(2πi)^n/(n-1)! Σ_k σ_{n-1}(k) q^k` at `τ = i`.
fn square_lattice_sum(n: i32) -> f64 {
    let s = n as f64;
    let k0 = 50.0f64;
    let zeta = (1..50).map(|k| (k as f64).powf(-s)).sum::<f64>()
        + k0.powf(1.0 - s) / (s - 1.0)
        + 0.5 * k0.powf(-s)
        + s * k0.powf(-s - 1.0) / 12.0;
    let fact: f64 = (1..n).map(|k| k as f64).product();
    let mut series = 0.0;
    for k in 1..=40u32 {
        let sigma: f64 = (1..=k).filter(|d| k % d == 0).map(|d| (d as f64).powi(n - 1)).sum();
        series += sigma * (-2.0 * PI * k as f64).exp();
    }
    2.0 * zeta + 2.0 * (2.0 * PI).powi(n) / fact * series
}

/// Highest lattice-sum order kept in the correction series.
pub const MAX_ORDER: i32 = 64;

/// `plane(z) = periodic(z) + (1/2πi)(π z̄/P² + Σ_j G_{4j} z^{4j-1})`, where
/// `G_n = Σ_{ω≠0} ω^{-n}` over the lattice `P(ℤ + iℤ)`. Odd multiples of 2
/// vanish by the fourfold symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusCorrection {
    pub period: f64,
    /// `(n, G_n)` for `n = 4, 8, ...`.
    pub lattice_sums: Vec<(i32, f64)>,
}

impl TorusCorrection {
    pub fn new(half_width: f64) -> Self {
        let period = 2.0 * half_width;
        let lattice_sums = (1..=MAX_ORDER / 4).map(|j| 4 * j).map(|n| (n, square_lattice_sum(n) / period.powi(n))).collect();
        Self { period, lattice_sums }
    }

    /// Complex value `c` such that `plane - periodic = c / (2πi)` in `u - iv` form.
    fn complex_offset(&self, z: Complex64) -> Complex64 {
        let area = self.period * self.period;
        let mut c = z.conj() * (PI / area);
        let z4 = z * z * z * z;
        let mut zp = z * z * z;
        for &(_, g) in &self.lattice_sums {
            c += zp * g;
            zp *= z4;
        }
        c
    }

    /// Velocity to add to a periodic kernel value at separation `z`.
    pub fn at(&self, z: Vec2) -> Vec2 {
        from_conj_velocity(self.complex_offset(Complex64::new(z.x1, z.x2)))
    }

    /// `Σ_k offset(z - z_k)` for every `z` in `targets`, computed from the
    /// complex moments of `sources` in O(n) per target.
    pub fn summed(&self, targets: &[Vec2], sources: &[Vec2]) -> Vec<Vec2> {
        let max_pow = self.lattice_sums.last().map(|&(n, _)| n as usize - 1).unwrap_or(3);
        let zs: Vec<Complex64> = sources.iter().map(|p| Complex64::new(p.x1, p.x2)).collect();
        // moments S_p = Σ z_k^p
        let mut moments = vec![Complex64::new(0.0, 0.0); max_pow + 1];
        for &z in &zs {
            let mut p = Complex64::new(1.0, 0.0);
            for s in moments.iter_mut() {
                *s += p;
                p *= z;
            }
        }
        let n = zs.len() as f64;
        let mean_conj = moments[1].conj();
        let area = self.period * self.period;
        let binom = binomials(max_pow);
        // Σ_q G_{q+1} Σ_k (z - z_k)^q = Σ_p coef_p z^p, using
        // Σ_k (z - z_k)^q = Σ_j C(q,j) z^{q-j} (-1)^j S_j
        let mut coef = vec![Complex64::new(0.0, 0.0); max_pow + 1];
        for &(order, g) in &self.lattice_sums {
            let q = order as usize - 1;
            for (j, &s) in moments.iter().enumerate().take(q + 1) {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                coef[q - j] += s * (binom[q][j] * sign * g);
            }
        }
        targets
            .iter()
            .map(|t| {
                let z = Complex64::new(t.x1, t.x2);
                let poly = coef.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
                from_conj_velocity((z.conj() * n - mean_conj) * (PI / area) + poly)
            })
            .collect()
    }
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1.0;
        for j in 1..=i {
            b[i][j] = b[i - 1][j - 1] + if j < i { b[i - 1][j] } else { 0.0 };
        }
    }
    b
}

/// `(u, v)` from `c / (2πi) = u - iv`.
fn from_conj_velocity(c: Complex64) -> Vec2 {
    let w = c / Complex64::new(0.0, 2.0 * PI);
    Vec2::new(w.re, -w.im)
}

/// Tabulated `K * V^N` on a centered square grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub field: VectorField,
    pub spec: MollifierSpec,
    /// Real DFT of `V^N` sampled with the origin at index 0, reused by the
    /// particle-mesh drift.
    pub(crate) vn_dft: Vec<f64>,
    pub(crate) torus: Option<TorusCorrection>,
}

/// Picks the smallest box whose `V^N` tail is below `TAIL_TOLERANCE` and at
/// least `min_half_width`, and the smallest power-of-two `M` with
/// `h ≤ bandwidth / cells_per_bandwidth`.
pub fn table_dimensions(spec: &MollifierSpec, min_half_width: f64, cells_per_bandwidth: f64) -> (f64, usize) {
    let mut l = spec.bandwidth();
    while spec.tail_mass(l) > TAIL_TOLERANCE {
        l *= 1.05;
    }
    let l = l.max(min_half_width);
    let mut m = 8usize;
    while 2.0 * l / m as f64 > spec.bandwidth() / cells_per_bandwidth {
        m *= 2;
    }
    (l, m)
}

/// Builds the planar `K * V^N` table on `[-L, L)²` with `M` points per side.
pub fn build_interaction_table(spec: &MollifierSpec, half_width: f64, points: usize) -> Result<KernelTable> {
    build_table(spec, half_width, points, true)
}

/// As [`build_interaction_table`] but returns the raw periodic field, without
/// the torus-to-plane correction.
pub fn build_periodic_table(spec: &MollifierSpec, half_width: f64, points: usize) -> Result<KernelTable> {
    build_table(spec, half_width, points, false)
}

fn build_table(spec: &MollifierSpec, half_width: f64, m: usize, plane: bool) -> Result<KernelTable> {
    if !m.is_power_of_two() {
        return Err(Error::GridRule(format!("table size M = {m} must be a power of two")));
    }
    let geom = GridGeometry::centered(half_width, m)?;
    let tail = spec.tail_mass(half_width);
    if tail > TAIL_TOLERANCE {
        return Err(Error::TailMass { mass: tail, tolerance: TAIL_TOLERANCE });
    }
    let h = geom.spacing();
    let half = m / 2;
    // V^N with the origin at index 0 (periodic wrap)
    let wrapped = |i: usize| if i < half { i as f64 * h } else { (i as f64 - m as f64) * h };
    let vn: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|k| eval_vn(spec, Vec2::new(wrapped(k / m), wrapped(k % m))))
        .collect();
    let fft = Fft2::new(m);
    let vhat = fft.forward_real(&vn);
    let vn_dft: Vec<f64> = vhat.iter().map(|c| c.re).collect();
    let k = wavenumbers(m, half_width);
    let mut u1 = vec![Complex64::new(0.0, 0.0); m * m];
    let mut u2 = u1.clone();
    for a in 0..m {
        for b in 0..m {
            if is_nyquist(a, m) || is_nyquist(b, m) {
                continue;
            }
            let idx = a * m + b;
            let [m1, m2] = biot_savart_multiplier(k[a], k[b]);
            u1[idx] = m1 * vn_dft[idx];
            u2[idx] = m2 * vn_dft[idx];
        }
    }
    let u1 = fft.inverse_real(u1);
    let u2 = fft.inverse_real(u2);
    let torus = plane.then(|| TorusCorrection::new(half_width));
    // move to the centered layout and antisymmetrize exactly
    let src = |i: usize| (i + half) % m;
    let mut values = vec![Vec2::ZERO; m * m];
    for i in 0..m {
        for j in 0..m {
            values[i * m + j] = Vec2::new(u1[src(i) * m + src(j)], u2[src(i) * m + src(j)]);
        }
    }
    if let Some(t) = &torus {
        for i in 0..m {
            for j in 0..m {
                values[i * m + j] += t.at(geom.local(i, j));
            }
        }
    }
    let mirror = |i: usize| (m - i) % m;
    let mut anti = vec![Vec2::ZERO; m * m];
    for i in 0..m {
        for j in 0..m {
            let v = values[i * m + j];
            let w = values[mirror(i) * m + mirror(j)];
            anti[i * m + j] = (v - w) * 0.5;
        }
    }
    Ok(KernelTable { field: GridField::from_values(geom, anti)?, spec: *spec, vn_dft, torus })
}

impl KernelTable {
    pub fn half_width(&self) -> f64 {
        self.field.geom.half_width
    }

    pub fn points(&self) -> usize {
        self.field.geom.points
    }

    pub fn spacing(&self) -> f64 {
        self.field.geom.spacing()
    }

    /// Largest sup-norm separation that can be interpolated.
    pub fn reach(&self) -> f64 {
        self.half_width() - self.spacing()
    }

    pub fn torus_correction(&self) -> Option<&TorusCorrection> {
        self.torus.as_ref()
    }

    /// Bilinear interpolation, symmetrized so that `interpolate(-z)` is
    /// exactly `-interpolate(z)`.
    pub fn interpolate(&self, z: Vec2) -> Result<Vec2> {
        let a = self.interpolate_raw(z)?;
        let b = self.interpolate_raw(-z)?;
        Ok((a - b) * 0.5)
    }

    /// Plain bilinear interpolation of the node values.
    #[inline]
    pub fn interpolate_raw(&self, z: Vec2) -> Result<Vec2> {
        let reach = self.reach();
        if !(z.x1.abs() < reach && z.x2.abs() < reach) {
            return Err(Error::OutOfBox { x1: z.x1, x2: z.x2, half_width: reach });
        }
        let g = &self.field.geom;
        let inv_h = 1.0 / g.spacing();
        let half = (g.points / 2) as f64;
        let s1 = z.x1 * inv_h + half;
        let s2 = z.x2 * inv_h + half;
        let f1 = s1.floor();
        let f2 = s2.floor();
        let (t1, t2) = (s1 - f1, s2 - f2);
        let m = g.points;
        let i0 = f1 as usize;
        let j0 = f2 as usize;
        let v = &self.field.values;
        let a = v[i0 * m + j0];
        let b = v[i0 * m + j0 + 1];
        let c = v[(i0 + 1) * m + j0];
        let d = v[(i0 + 1) * m + j0 + 1];
        Ok((a * (1.0 - t2) + b * t2) * (1.0 - t1) + (c * (1.0 - t2) + d * t2) * t1)
    }

    /// Largest `|ξ · û(ξ)| / (|ξ| |û(ξ)|)` over the modes of the spectral
    /// construction; zero up to rounding.
    pub fn divergence_residual(&self) -> f64 {
        let m = self.points();
        let k = wavenumbers(m, self.half_width());
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let [m1, m2] = biot_savart_multiplier(k[a], k[b]);
                let v = self.vn_dft[a * m + b];
                let (u1, u2) = (m1 * v, m2 * v);
                let dot = u1 * k[a] + u2 * k[b];
                let scale = (k[a].hypot(k[b])) * (u1.norm_sqr() + u2.norm_sqr()).sqrt();
                if scale > 0.0 {
                    worst = worst.max(dot.norm() / scale);
                }
            }
        }
        worst
    }
}
