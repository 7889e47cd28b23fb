//! Pseudo-spectral solver for `∂_t ρ̃ = Δρ̃ - ∇·(ρ̃ K*ρ̃)` and the random shift
//! `ρ(t, x) = ρ̃(t, x - X_t)` with `dX_t = σ_t dB_t`.
//!
//! Time stepping: exact diffusion (integrating factor) with Heun's method for
//! transport; 2/3-rule dealiasing on the nonlinear flux.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fields::{shift_field, GridField, GridGeometry, ScalarField, ShiftMethod};
use crate::kernels::biot_savart_multiplier;
use crate::particles::{CommonNoiseRecord, SigmaSchedule};
use crate::spectral::{signed_freq, wavenumbers, Fft2};
use crate::{Error, Mat2, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest allowed time step.
    pub dt: f64,
    pub cfl: f64,
    /// Most negative tolerated density value.
    pub negativity_floor: f64,
    /// Largest tolerated mass in the outer band of the box.
    pub boundary_tolerance: f64,
    /// Width of the outer band as a fraction of the half-width.
    pub boundary_band: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { dt: 1e-3, cfl: 0.5, negativity_floor: -1e-6, boundary_tolerance: 1e-8, boundary_band: 0.125 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: ScalarField,
}

/// `X_t` sampled at the steps of a common-noise record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ShiftPath {
    pub dt: f64,
    pub points: Vec<Vec2>,
}

impl ShiftPath {
    pub fn at_step(&self, k: usize) -> Vec2 {
        self.points[k.min(self.points.len() - 1)]
    }

    /// Value at the step nearest to `t`.
    pub fn at(&self, t: f64) -> Vec2 {
        self.at_step((t / self.dt).round().max(0.0) as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSolution {
    pub snapshots: Vec<Snapshot>,
    pub shift_path: Option<ShiftPath>,
    /// Largest `|u| dt / h` observed.
    pub max_courant: f64,
    pub min_value: f64,
    pub steps: usize,
}

/// Step indices `round(k · n_steps / (count - 1))`, `k = 0..count`.
pub fn snapshot_steps(n_steps: usize, count: usize) -> Vec<usize> {
    if count <= 1 {
        return vec![n_steps];
    }
    let mut out: Vec<usize> = (0..count)
        .map(|k| ((k as f64) * n_steps as f64 / (count - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

struct Operators {
    fft: Fft2,
    k1: Vec<f64>,
    k2: Vec<f64>,
    keep: Vec<bool>,
    m: usize,
}

impl Operators {
    fn new(geom: &GridGeometry) -> Self {
        let m = geom.points;
        let k = wavenumbers(m, geom.half_width);
        let mut k1 = vec![0.0; m * m];
        let mut k2 = vec![0.0; m * m];
        let mut keep = vec![false; m * m];
        let cut = m as i64 / 3;
        for a in 0..m {
            for b in 0..m {
                let idx = a * m + b;
                k1[idx] = k[a];
                k2[idx] = k[b];
                keep[idx] = signed_freq(a, m).abs() <= cut && signed_freq(b, m).abs() <= cut;
            }
        }
        Self { fft: Fft2::new(m), k1, k2, keep, m }
    }

    fn velocity(&self, rho_hat: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.m * self.m;
        let mut u1 = vec![Complex64::new(0.0, 0.0); n];
        let mut u2 = u1.clone();
        for idx in 0..n {
            if !self.keep[idx] {
                continue;
            }
            let [m1, m2] = biot_savart_multiplier(self.k1[idx], self.k2[idx]);
            u1[idx] = m1 * rho_hat[idx];
            u2[idx] = m2 * rho_hat[idx];
        }
        (self.fft.inverse_real(u1), self.fft.inverse_real(u2))
    }

    /// `-∇·(ρ u)` in Fourier space, and the largest speed.
    fn transport(&self, rho_hat: &[Complex64]) -> (Vec<Complex64>, f64) {
        let (u1, u2) = self.velocity(rho_hat);
        let rho = self.fft.inverse_real(rho_hat.to_vec());
        let vmax = u1.iter().zip(&u2).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
        let f1 = self.fft.forward_real(&rho.iter().zip(&u1).map(|(r, u)| r * u).collect::<Vec<_>>());
        let f2 = self.fft.forward_real(&rho.iter().zip(&u2).map(|(r, u)| r * u).collect::<Vec<_>>());
        let out = (0..self.m * self.m)
            .map(|idx| {
                if self.keep[idx] {
                    -(Complex64::new(0.0, self.k1[idx]) * f1[idx] + Complex64::new(0.0, self.k2[idx]) * f2[idx])
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        (out, vmax)
    }
}

/// Solves the deterministic vorticity equation on the grid of `rho0` and
/// returns snapshots at `times` (increasing, starting at or after 0).
pub fn solve_vorticity(rho0: &ScalarField, times: &[f64], opts: &SolverOptions) -> Result<LimitSolution> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Config("snapshot times must be nonnegative and increasing".into()));
    }
    if !(opts.dt > 0.0) {
        return Err(Error::Config(format!("PDE dt = {} must be positive", opts.dt)));
    }
    if rho0.min() < 0.0 {
        return Err(Error::NegativeDensity { min: rho0.min(), t: 0.0 });
    }
    rho0.check_density(1e-6)?;
    let geom = rho0.geom;
    let h = geom.spacing();
    let ops = Operators::new(&geom);
    let n = geom.len();
    let k2: Vec<f64> = (0..n).map(|i| ops.k1[i].powi(2) + ops.k2[i].powi(2)).collect();
    let mut rho_hat = ops.fft.forward_real(&rho0.values);
    let mut t = 0.0;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut max_courant: f64 = 0.0;
    let mut min_value = rho0.min();
    let mut steps = 0;
    for &target in times {
        let span = target - t;
        let sub = if span > 0.0 { (span / opts.dt).ceil() as usize } else { 0 };
        if sub > 0 {
            let dt = span / sub as f64;
            let decay: Vec<f64> = k2.iter().map(|&q| (-q * dt).exp()).collect();
            for _ in 0..sub {
                let (f0, v0) = ops.transport(&rho_hat);
                let courant = v0 * dt / h;
                max_courant = max_courant.max(courant);
                if courant > opts.cfl {
                    return Err(Error::Cfl { dt, limit: opts.cfl * h / v0 });
                }
                let stage: Vec<Complex64> =
                    (0..n).map(|i| (rho_hat[i] + f0[i] * dt) * decay[i]).collect();
                let (f1, _) = ops.transport(&stage);
                for i in 0..n {
                    rho_hat[i] = (rho_hat[i] + f0[i] * (0.5 * dt)) * decay[i] + f1[i] * (0.5 * dt);
                }
                steps += 1;
            }
            t = target;
        }
        let field = if steps == 0 {
            rho0.clone()
        } else {
            GridField::from_values(geom, ops.fft.inverse_real(rho_hat.clone()))?
        };
        let lo = field.min();
        min_value = min_value.min(lo);
        if lo < opts.negativity_floor {
            return Err(Error::NegativeDensity { min: lo, t });
        }
        let band = boundary_mass(&field, opts.boundary_band);
        if band > opts.boundary_tolerance {
            return Err(Error::BoundaryMass { mass: band, t });
        }
        snapshots.push(Snapshot { t, field });
    }
    Ok(LimitSolution { snapshots, shift_path: None, max_courant, min_value, steps })
}

/// Mass within the outer band `|x - c|_∞ > (1 - band) L`.
pub fn boundary_mass(field: &ScalarField, band: f64) -> f64 {
    let g = field.geom;
    let inner = (1.0 - band) * g.half_width;
    let m = g.points;
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            if g.local(i, j).max_abs() > inner {
                acc += field.values[i * m + j].abs();
            }
        }
    }
    acc * g.cell_area()
}

/// `X_t = Σ_k σ(t_k) ΔB_k` from a recorded common path.
pub fn sample_shift_path(record: &CommonNoiseRecord, sigma: &SigmaSchedule, t_end: f64, dt: f64) -> Result<ShiftPath> {
    let expected = (t_end / dt).round() as usize;
    if record.increments.len() != expected || (record.dt - dt).abs() > 1e-15 * dt.max(1.0) {
        return Err(Error::PathLength { expected, found: record.increments.len() });
    }
    let mut x = Vec2::ZERO;
    let mut t = 0.0;
    let mut points = Vec::with_capacity(expected + 1);
    points.push(x);
    for &db in &record.increments {
        x += sigma.at(t).apply(db);
        t += dt;
        points.push(x);
    }
    Ok(ShiftPath { dt, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMode {
    /// Relabel the grid so it is centered at `X_t`; exact.
    #[default]
    CoMoving,
    /// Resample on the original grid.
    Resample(ShiftMethod),
}

/// `ρ(t_k, ·) = ρ̃(t_k, · - X_{t_k})` for snapshot `k`.
pub fn shifted_solution(sol: &LimitSolution, k: usize, mode: ShiftMode) -> Result<ScalarField> {
    let snap = sol
        .snapshots
        .get(k)
        .ok_or_else(|| Error::Config(format!("snapshot {k} out of range")))?;
    let x = sol.shift_path.as_ref().map(|p| p.at(snap.t)).unwrap_or(Vec2::ZERO);
    match mode {
        ShiftMode::CoMoving => Ok(snap.field.recentered(snap.field.geom.center + x)),
        ShiftMode::Resample(method) => shift_field(&snap.field, x, method),
    }
}

/// Thresholds for the Gaussian bound: `C₃ = min(1/2π, 1/(8π C))`
/// and `T₁ = min(C̃₃/8, 8(1 - 2πC̃₃)/(2π))`.
pub fn decay_thresholds(c_tilde3: f64, heat_constant: f64) -> (f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let c3 = (1.0 / two_pi).min(1.0 / (8.0 * std::f64::consts::PI * heat_constant));
    let t1 = (c_tilde3 / 8.0).min(8.0 * (1.0 - two_pi * c_tilde3) / two_pi);
    (c3, t1)
}

/// Smallest `C̃₃` with `ρ₀(x) ≤ C̃₃ exp(-|x|²/C̃₃)` at every node (bisection on
/// a log scale); `None` if no value up to `10⁶` works.
pub fn gaussian_tail_constant(rho0: &ScalarField) -> Option<f64> {
    let holds = |c: f64| {
        rho0.values.iter().enumerate().all(|(k, &v)| {
            let x = rho0.geom.node(k / rho0.geom.points, k % rho0.geom.points);
            v <= c * (-x.norm_sq() / c).exp()
        })
    };
    let (mut lo, mut hi) = (1e-6f64, 1e6f64);
    if !holds(hi) {
        return None;
    }
    if holds(lo) {
        return Some(lo);
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// Smallest `C₁` with `|∇ln ρ|² ≤ C₁(1 + |x - X_t|²)` on the window.
    pub c1: f64,
    /// Smallest `C₂` with `‖∇² ln ρ‖ ≤ C₂(1 + |x - X_t|²)`.
    pub c2: f64,
    /// `max ρ / (2 exp(-2π|x - X_t|²))` over all nodes and snapshots.
    pub gaussian_ratio: f64,
    /// The same maximum restricted to nodes where `ρ > window`.
    pub gaussian_ratio_window: f64,
    /// Snapshot times at which the Gaussian bound fails on the window.
    pub gaussian_failures: Vec<f64>,
    pub c1_holds: bool,
    pub c2_holds: bool,
}

impl DecayReport {
    pub fn gaussian_holds(&self) -> bool {
        self.gaussian_failures.is_empty()
    }
}

/// Relative slack of the Gaussian bound, for data that touch it exactly.
pub const GAUSSIAN_RTOL: f64 = 1e-12;

/// Checks the log-gradient, log-Hessian and Gaussian bounds on every snapshot
/// with `t ≤ t_max`, on the nodes where `ρ > window` (and their stencils).
pub fn check_decay_bounds(sol: &LimitSolution, c1: f64, c2: f64, t_max: f64, window: f64) -> DecayReport {
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let mut ratio_window: f64 = 0.0;
    let mut failures = Vec::new();
    for snap in sol.snapshots.iter().filter(|s| s.t <= t_max + 1e-12) {
        let f = &snap.field;
        let g = f.geom;
        let m = g.points;
        let h = g.spacing();
        let lnf = |i: usize, j: usize| f.values[i * m + j].ln();
        let inside = |i: usize, j: usize| f.values[i * m + j] > window;
        let mut failed = false;
        for i in 0..m {
            for j in 0..m {
                // ρ(t, X_t + y) = ρ̃(t, y)
                let r2 = g.node(i, j).norm_sq();
                let v = f.values[i * m + j];
                let q = v / (2.0 * (-2.0 * std::f64::consts::PI * r2).exp());
                ratio = ratio.max(q);
                if v > window {
                    ratio_window = ratio_window.max(q);
                    if q > 1.0 + GAUSSIAN_RTOL {
                        failed = true;
                    }
                }
                if i == 0 || j == 0 || i + 1 == m || j + 1 == m {
                    continue;
                }
                let stencil = [(i, j), (i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1), (i - 1, j - 1), (i + 1, j + 1), (i - 1, j + 1), (i + 1, j - 1)];
                if !stencil.iter().all(|&(a, b)| inside(a, b)) {
                    continue;
                }
                let d1 = (lnf(i + 1, j) - lnf(i - 1, j)) / (2.0 * h);
                let d2 = (lnf(i, j + 1) - lnf(i, j - 1)) / (2.0 * h);
                let h11 = (lnf(i + 1, j) - 2.0 * lnf(i, j) + lnf(i - 1, j)) / (h * h);
                let h22 = (lnf(i, j + 1) - 2.0 * lnf(i, j) + lnf(i, j - 1)) / (h * h);
                let h12 = (lnf(i + 1, j + 1) - lnf(i + 1, j - 1) - lnf(i - 1, j + 1) + lnf(i - 1, j - 1)) / (4.0 * h * h);
                let w = 1.0 + r2;
                e1 = e1.max((d1 * d1 + d2 * d2) / w);
                e2 = e2.max(Mat2::new(h11, h12, h12, h22).op_norm() / w);
            }
        }
        if failed {
            failures.push(snap.t);
        }
    }
    DecayReport {
        c1: e1,
        c2: e2,
        gaussian_ratio: ratio,
        gaussian_ratio_window: ratio_window,
        gaussian_failures: failures,
        c1_holds: e1 <= c1,
        c2_holds: e2 <= c2,
    }
}
