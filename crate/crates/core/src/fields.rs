//! Uniform square grids, scalar/vector fields on them, and the mollified
//! empirical density `ρ^N = V^N * S^N`.
//!
//! Node `(i, j)` of a grid with `M` points per side, half-width `L` and center
//! `c` sits at `c + ((i - ⌊M/2⌋) h, (j - ⌊M/2⌋) h)` with `h = 2L/M`; values are
//! stored row-major at `i * M + j`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mollifier::{vn_and_grad_sq, MollifierSpec};
use crate::spectral::{is_nyquist, wavenumbers, Fft2};
use crate::{Error, Result, Vec2};

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub center: Vec2,
    pub half_width: f64,
    pub points: usize,
}

impl GridGeometry {
    pub fn new(center: Vec2, half_width: f64, points: usize) -> Result<Self> {
        if points < MIN_POINTS {
            return Err(Error::GridRule(format!("M = {points} is below the minimum of {MIN_POINTS}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) || !center.is_finite() {
            return Err(Error::GridRule(format!("half-width {half_width} must be positive and finite")));
        }
        Ok(Self { center, half_width, points })
    }

    pub fn centered(half_width: f64, points: usize) -> Result<Self> {
        Self::new(Vec2::ZERO, half_width, points)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    /// Signed index offset of node `i` from the center node.
    pub fn offset_index(&self, i: usize) -> i64 {
        i as i64 - (self.points / 2) as i64
    }

    /// Node position relative to the grid center.
    pub fn local(&self, i: usize, j: usize) -> Vec2 {
        let h = self.spacing();
        Vec2::new(self.offset_index(i) as f64 * h, self.offset_index(j) as f64 * h)
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        self.center + self.local(i, j)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).max_abs() <= self.half_width
    }

    pub fn with_center(&self, center: Vec2) -> Self {
        Self { center, ..*self }
    }

    /// Centered sub-grid with `2k + 1` nodes per side and the same spacing.
    pub fn sub_box(&self, k: usize) -> Result<Self> {
        let pts = 2 * k + 1;
        if pts > self.points {
            return Err(Error::GridRule(format!("sub-box of {pts} points exceeds {}", self.points)));
        }
        Self::new(self.center, pts as f64 * self.spacing() / 2.0, pts)
    }

    /// Checks that the grid resolves the mollifier bandwidth with at least
    /// `cells` nodes.
    pub fn check_resolution(&self, spec: &MollifierSpec, cells: f64) -> Result<()> {
        let need = spec.bandwidth() / cells;
        if self.spacing() > need * (1.0 + 1e-12) {
            return Err(Error::GridRule(format!(
                "spacing {:.5} exceeds bandwidth/{cells} = {need:.5} for N = {}",
                self.spacing(),
                spec.n
            )));
        }
        Ok(())
    }
}

/// Values sampled on a [`GridGeometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    pub geom: GridGeometry,
    pub values: Vec<T>,
}

pub type ScalarField = GridField<f64>;
pub type VectorField = GridField<Vec2>;

impl<T: Copy + Send + Sync> GridField<T> {
    pub fn from_values(geom: GridGeometry, values: Vec<T>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::GridRule(format!("{} values for a {}-node grid", values.len(), geom.len())));
        }
        Ok(Self { geom, values })
    }

    pub fn from_fn(geom: GridGeometry, f: impl Fn(Vec2) -> T + Sync) -> Self {
        let m = geom.points;
        let values = (0..m * m).into_par_iter().map(|k| f(geom.node(k / m, k % m))).collect();
        Self { geom, values }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.geom.points + j]
    }

    pub fn map<U: Copy + Send + Sync>(&self, f: impl Fn(T) -> U + Sync) -> GridField<U> {
        GridField { geom: self.geom, values: self.values.par_iter().map(|&v| f(v)).collect() }
    }

    /// Same values, relabelled to a grid with another center.
    pub fn recentered(&self, center: Vec2) -> Self {
        Self { geom: self.geom.with_center(center), values: self.values.clone() }
    }

    /// Centered `(2k+1)²` block of nodes.
    pub fn sub_field(&self, k: usize) -> Result<Self> {
        let geom = self.geom.sub_box(k)?;
        let m = self.geom.points;
        let start = m / 2 - k;
        let pts = geom.points;
        let mut values = Vec::with_capacity(pts * pts);
        for i in 0..pts {
            let row = (start + i) * m;
            values.extend_from_slice(&self.values[row + start..row + start + pts]);
        }
        Ok(Self { geom, values })
    }
}

impl ScalarField {
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.geom.cell_area()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn normalized(&self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NotNormalized(m));
        }
        Ok(self.map(|v| v / m))
    }

    /// Checks that the field is a finite, nonnegative density with unit mass.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotNormalized(f64::NAN));
        }
        let m = self.mass();
        if (m - 1.0).abs() > tol {
            return Err(Error::NotNormalized(m));
        }
        Ok(())
    }

    /// Values along `x1` at column `j`, as `(x1, value)` pairs.
    pub fn slice_x1(&self, j: usize) -> Vec<(f64, f64)> {
        (0..self.geom.points).map(|i| (self.geom.node(i, j).x1, self.get(i, j))).collect()
    }

    /// Bilinear interpolation; zero outside the node hull.
    pub fn sample_bilinear(&self, p: Vec2) -> f64 {
        let g = &self.geom;
        let h = g.spacing();
        let m = g.points as i64;
        let q = (p - g.center) * (1.0 / h);
        let s1 = q.x1 + (g.points / 2) as f64;
        let s2 = q.x2 + (g.points / 2) as f64;
        let i0 = s1.floor();
        let j0 = s2.floor();
        let (f1, f2) = (s1 - i0, s2 - j0);
        let (i0, j0) = (i0 as i64, j0 as i64);
        let at = |i: i64, j: i64| -> f64 {
            if i < 0 || j < 0 || i >= m || j >= m {
                0.0
            } else {
                self.values[(i * m + j) as usize]
            }
        };
        (1.0 - f1) * ((1.0 - f2) * at(i0, j0) + f2 * at(i0, j0 + 1))
            + f1 * ((1.0 - f2) * at(i0 + 1, j0) + f2 * at(i0 + 1, j0 + 1))
    }
}

/// Node-exact mollified empirical density on a grid centered at the origin.
pub fn mollified_density(positions: &[Vec2], spec: &MollifierSpec, half_width: f64, points: usize) -> Result<ScalarField> {
    mollified_density_on(positions, spec, &GridGeometry::centered(half_width, points)?)
}

/// `ρ^N(x) = (1/N) Σ_i V^N(x - X^i)` evaluated exactly at every node, skipping
/// pairs beyond the radius where `V^N < 10⁻¹⁶ · peak`.
pub fn mollified_density_on(positions: &[Vec2], spec: &MollifierSpec, geom: &GridGeometry) -> Result<ScalarField> {
    let (rho, _) = density_pass(positions, spec, geom, false, true)?;
    Ok(rho)
}

/// Mollified density together with the quadrature of the quadratic-variation
/// integrand `(1/2N²) Σ_i ∫ |∇V^N(x - X^i)|² / ρ^N(x) dx`, from one pass.
/// Particles may lie outside the grid; only the node values are computed.
pub fn density_and_qv_rate(positions: &[Vec2], spec: &MollifierSpec, geom: &GridGeometry) -> Result<(ScalarField, f64)> {
    density_pass(positions, spec, geom, true, false)
}

fn density_pass(
    positions: &[Vec2],
    spec: &MollifierSpec,
    geom: &GridGeometry,
    with_qv: bool,
    inside: bool,
) -> Result<(ScalarField, f64)> {
    if let Some(p) = positions.iter().find(|p| inside && !geom.contains(**p)) {
        return Err(Error::OutOfBox { x1: p.x1, x2: p.x2, half_width: geom.half_width });
    }
    let n = positions.len().max(1) as f64;
    let amp = spec.amplitude();
    let inv_w = spec.inverse_width();
    let r_cut2 = spec.cutoff_radius(1e-16).powi(2);
    let m = geom.points;
    // particle positions relative to the grid center
    let rel: Vec<Vec2> = positions.iter().map(|&p| p - geom.center).collect();
    let rows: Vec<(Vec<f64>, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; m];
            let mut qv = 0.0;
            for (j, out) in row.iter_mut().enumerate() {
                let x = geom.local(i, j);
                let mut sv = 0.0;
                let mut sg = 0.0;
                for &p in &rel {
                    let d = x - p;
                    if d.norm_sq() > r_cut2 {
                        continue;
                    }
                    let (v, g2) = vn_and_grad_sq(amp, inv_w, d);
                    sv += v;
                    sg += g2;
                }
                *out = sv / n;
                if with_qv && sv > 0.0 {
                    qv += sg / (sv / n);
                }
            }
            (row, qv)
        })
        .collect();
    let mut values = Vec::with_capacity(m * m);
    let mut qv = 0.0;
    for (row, q) in rows {
        values.extend(row);
        qv += q;
    }
    let qv_rate = qv * geom.cell_area() / (2.0 * n * n);
    Ok((GridField { geom: *geom, values }, qv_rate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Fourier differentiation; exact for band-limited periodic fields.
    #[default]
    Spectral,
    /// Second-order central differences, one-sided on the boundary.
    CentralDifference,
}

pub fn gradient(field: &ScalarField, method: GradientMethod) -> VectorField {
    match method {
        GradientMethod::Spectral => spectral_gradient(field),
        GradientMethod::CentralDifference => central_gradient(field),
    }
}

fn spectral_gradient(field: &ScalarField) -> VectorField {
    let m = field.geom.points;
    let k = wavenumbers(m, field.geom.half_width);
    let fft = Fft2::new(m);
    let spec = fft.forward_real(&field.values);
    let mut d1 = spec.clone();
    let mut d2 = spec;
    for a in 0..m {
        for b in 0..m {
            let idx = a * m + b;
            let k1 = if is_nyquist(a, m) { 0.0 } else { k[a] };
            let k2 = if is_nyquist(b, m) { 0.0 } else { k[b] };
            d1[idx] *= Complex64::new(0.0, k1);
            d2[idx] *= Complex64::new(0.0, k2);
        }
    }
    let g1 = fft.inverse_real(d1);
    let g2 = fft.inverse_real(d2);
    GridField { geom: field.geom, values: g1.into_iter().zip(g2).map(|(a, b)| Vec2::new(a, b)).collect() }
}

fn central_gradient(field: &ScalarField) -> VectorField {
    let m = field.geom.points;
    let h = field.geom.spacing();
    let f = |i: usize, j: usize| field.values[i * m + j];
    let diff = |lo: f64, hi: f64, span: f64| (hi - lo) / (span * h);
    let mut values = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let g1 = if i == 0 {
                diff(f(0, j), f(1, j), 1.0)
            } else if i == m - 1 {
                diff(f(m - 2, j), f(m - 1, j), 1.0)
            } else {
                diff(f(i - 1, j), f(i + 1, j), 2.0)
            };
            let g2 = if j == 0 {
                diff(f(i, 0), f(i, 1), 1.0)
            } else if j == m - 1 {
                diff(f(i, m - 2), f(i, m - 1), 1.0)
            } else {
                diff(f(i, j - 1), f(i, j + 1), 2.0)
            };
            values.push(Vec2::new(g1, g2));
        }
    }
    GridField { geom: field.geom, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMethod {
    /// Phase multiplication; exact for band-limited fields.
    #[default]
    Fourier,
    /// Bilinear resampling, zero outside the grid.
    Bilinear,
}

/// Resamples `x ↦ f(x - a)` on the same grid.
pub fn shift_field(field: &ScalarField, a: Vec2, method: ShiftMethod) -> Result<ScalarField> {
    if a.max_abs() > field.geom.half_width / 2.0 || !a.is_finite() {
        return Err(Error::ExcessiveShift(a.x1, a.x2));
    }
    if a == Vec2::ZERO {
        return Ok(field.clone());
    }
    match method {
        ShiftMethod::Fourier => {
            let m = field.geom.points;
            let k = wavenumbers(m, field.geom.half_width);
            let fft = Fft2::new(m);
            let mut spec = fft.forward_real(&field.values);
            for p in 0..m {
                for q in 0..m {
                    let k1 = if is_nyquist(p, m) { 0.0 } else { k[p] };
                    let k2 = if is_nyquist(q, m) { 0.0 } else { k[q] };
                    let phase = -(k1 * a.x1 + k2 * a.x2);
                    spec[p * m + q] *= Complex64::from_polar(1.0, phase);
                }
            }
            Ok(GridField { geom: field.geom, values: fft.inverse_real(spec) })
        }
        ShiftMethod::Bilinear => Ok(GridField::from_fn(field.geom, |x| field.sample_bilinear(x - a))),
    }
}

/// Inverse-CDF sampler for a nonnegative grid density, treating each node as
/// a uniform cell of side `h`. Negative values are clamped to zero.
#[derive(Debug, Clone)]
pub struct GridSampler {
    geom: GridGeometry,
    row_cdf: Vec<f64>,
    col_cdf: Vec<Vec<f64>>,
}

impl GridSampler {
    pub fn new(field: &ScalarField) -> Result<Self> {
        let m = field.geom.points;
        let mut row_cdf = Vec::with_capacity(m);
        let mut col_cdf = Vec::with_capacity(m);
        let mut acc = 0.0;
        for i in 0..m {
            let mut c = Vec::with_capacity(m);
            let mut r = 0.0;
            for j in 0..m {
                r += field.values[i * m + j].max(0.0);
                c.push(r);
            }
            acc += r;
            row_cdf.push(acc);
            col_cdf.push(c);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::NotNormalized(acc));
        }
        Ok(Self { geom: field.geom, row_cdf, col_cdf })
    }

    /// Maps a pair of uniforms in `[0, 1)` to a point; the map is monotone in
    /// each coordinate so common uniforms couple nearby densities.
    pub fn sample(&self, u1: f64, u2: f64) -> Vec2 {
        let h = self.geom.spacing();
        let (i, f1) = invert(&self.row_cdf, u1);
        let (j, f2) = invert(&self.col_cdf[i], u2);
        self.geom.node(i, j) + Vec2::new((f1 - 0.5) * h, (f2 - 0.5) * h)
    }
}

fn invert(cdf: &[f64], u: f64) -> (usize, f64) {
    let total = *cdf.last().unwrap();
    let target = u.clamp(0.0, 1.0) * total;
    let k = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
    // skip empty cells at the upper end
    let k = (0..=k).rev().find(|&k| cdf[k] > if k == 0 { 0.0 } else { cdf[k - 1] }).unwrap_or(k);
    let lo = if k == 0 { 0.0 } else { cdf[k - 1] };
    let w = cdf[k] - lo;
    let frac = if w > 0.0 { ((target - lo) / w).clamp(0.0, 1.0) } else { 0.5 };
    (k, frac)
}
