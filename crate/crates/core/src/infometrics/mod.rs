//! Relative entropy, Fisher information, L¹ and KR distances on grids, the
//! Donsker–Varadhan check, and the quadratic-variation diagnostic.
//!
//! Floor policy: nodes with `f < 10⁻¹⁴ · peak(f)` are dropped; a node with
//! `f` above the floor and `g < 10⁻³⁰` is a support mismatch.

pub mod assignment;
pub mod kr;

use serde::{Deserialize, Serialize};

use crate::fields::{gradient, GradientMethod, ScalarField};
use crate::particles::ExitRecord;
use crate::{Error, Result, Vec2};

pub use kr::{kr_distance, kr_lower, wasserstein1, KrBracket, KrOptions, Measure};

pub const F_FLOOR_REL: f64 = 1e-14;
pub const G_FLOOR: f64 = 1e-30;

fn same_grid(f: &ScalarField, g: &ScalarField) -> Result<()> {
    let (a, b) = (f.geom, g.geom);
    let tol = 1e-12 * a.half_width;
    if a.points != b.points || (a.half_width - b.half_width).abs() > tol || (a.center - b.center).max_abs() > tol {
        return Err(Error::Config("functionals need both fields on the same grid".into()));
    }
    Ok(())
}

fn floor_of(f: &ScalarField) -> f64 {
    F_FLOOR_REL * f.peak()
}

/// `H(f|g) = ∫ f ln(f/g)`.
pub fn relative_entropy(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    same_grid(f, g)?;
    let floor = floor_of(f);
    let m = f.geom.points;
    let mut acc = 0.0;
    for (k, (&a, &b)) in f.values.iter().zip(&g.values).enumerate() {
        if a < floor || a <= 0.0 {
            continue;
        }
        if b < G_FLOOR {
            return Err(Error::SupportMismatch { f: a, g: b, i: k / m, j: k % m });
        }
        acc += a * (a / b).ln();
    }
    Ok(acc * f.geom.cell_area())
}

/// `I(f|g) = ∫ f |∇ ln(f/g)|²` over the nodes above the floor.
///
/// The central-difference path differentiates `ψ = ln(f/g)` directly; the
/// spectral path uses `∇f/f - ∇g/g`.
pub fn fisher_information(f: &ScalarField, g: &ScalarField, method: GradientMethod) -> Result<f64> {
    same_grid(f, g)?;
    let floor = floor_of(f);
    let m = f.geom.points;
    for (k, (&a, &b)) in f.values.iter().zip(&g.values).enumerate() {
        if a >= floor && a > 0.0 && b < G_FLOOR {
            return Err(Error::SupportMismatch { f: a, g: b, i: k / m, j: k % m });
        }
    }
    let area = f.geom.cell_area();
    match method {
        GradientMethod::Spectral => {
            let gf = gradient(f, GradientMethod::Spectral);
            let gg = gradient(g, GradientMethod::Spectral);
            let mut acc = 0.0;
            for k in 0..m * m {
                let (a, b) = (f.values[k], g.values[k]);
                if a < floor || a <= 0.0 {
                    continue;
                }
                let d = gf.values[k] * (1.0 / a) - gg.values[k] * (1.0 / b);
                acc += a * d.norm_sq();
            }
            Ok(acc * area)
        }
        GradientMethod::CentralDifference => {
            let h = f.geom.spacing();
            let psi: Vec<Option<f64>> = f
                .values
                .iter()
                .zip(&g.values)
                .map(|(&a, &b)| (a > 0.0 && b >= G_FLOOR).then(|| (a / b).ln()))
                .collect();
            let at = |i: usize, j: usize| psi[i * m + j];
            let deriv = |lo: Option<f64>, mid: f64, hi: Option<f64>| match (lo, hi) {
                (Some(l), Some(r)) => (r - l) / (2.0 * h),
                (None, Some(r)) => (r - mid) / h,
                (Some(l), None) => (mid - l) / h,
                (None, None) => 0.0,
            };
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let a = f.values[i * m + j];
                    if a < floor || a <= 0.0 {
                        continue;
                    }
                    let Some(mid) = at(i, j) else { continue };
                    let d1 = deriv(
                        if i > 0 { at(i - 1, j) } else { None },
                        mid,
                        if i + 1 < m { at(i + 1, j) } else { None },
                    );
                    let d2 = deriv(
                        if j > 0 { at(i, j - 1) } else { None },
                        mid,
                        if j + 1 < m { at(i, j + 1) } else { None },
                    );
                    acc += a * (d1 * d1 + d2 * d2);
                }
            }
            Ok(acc * area)
        }
    }
}

pub fn l1_distance(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    same_grid(f, g)?;
    Ok(f.values.iter().zip(&g.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * f.geom.cell_area())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvReport {
    pub lhs: f64,
    pub rhs: f64,
    pub entropy: f64,
}

impl DvReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Both sides of `∫fΦ ≤ η H(f|g) + η ln ∫ g e^{Φ/η}`.
pub fn dv_check(f: &ScalarField, g: &ScalarField, phi: &ScalarField, eta: f64) -> Result<DvReport> {
    same_grid(f, g)?;
    same_grid(f, phi)?;
    if !(eta > 0.0) {
        return Err(Error::Config(format!("eta = {eta} must be positive")));
    }
    let area = f.geom.cell_area();
    let top = phi.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / eta;
    if !top.is_finite() || top > 700.0 {
        return Err(Error::Integrability(top));
    }
    let s: f64 = g.values.iter().zip(&phi.values).map(|(&b, &p)| b * (p / eta - top).exp()).sum::<f64>() * area;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Integrability(top));
    }
    let lhs = f.values.iter().zip(&phi.values).map(|(a, p)| a * p).sum::<f64>() * area;
    let entropy = relative_entropy(f, g)?;
    let rhs = eta * entropy + eta * (top + s.ln());
    Ok(DvReport { lhs, rhs, entropy })
}

/// Cumulative trapezoid integral of `rates` over `times`.
pub fn qv_cumulative(times: &[f64], rates: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rates.len());
    let mut acc = 0.0;
    for k in 0..rates.len() {
        if k > 0 {
            acc += 0.5 * (rates[k] + rates[k - 1]) * (times[k] - times[k - 1]);
        }
        out.push(acc);
    }
    out
}

/// `(1/2N²) Σ_i ∫₀ᵗ ∫ |∇V^N(x - X^i_s)|² / ρ^N_s dx ds` from per-snapshot
/// rates (see [`crate::fields::density_and_qv_rate`]). Refuses runs whose
/// stopping time fired before the last snapshot.
pub fn qv_term(times: &[f64], rates: &[f64], exit: Option<&ExitRecord>) -> Result<f64> {
    if times.len() != rates.len() || times.is_empty() {
        return Err(Error::PathLength { expected: times.len(), found: rates.len() });
    }
    if let Some(e) = exit {
        if e.exited && e.tau <= *times.last().unwrap() {
            return Err(Error::StoppedRun(e.tau));
        }
    }
    Ok(*qv_cumulative(times, rates).last().unwrap())
}

/// Diagnostics along one path; all columns have equal length.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    pub fisher: Vec<f64>,
    pub l1: Vec<f64>,
    pub kr_lo: Vec<f64>,
    pub kr_hi: Vec<f64>,
    pub qv_cum: Vec<f64>,
}

pub const TRACE_COLUMNS: [&str; 7] = ["t", "H", "I", "l1", "kr_lo", "kr_hi", "qv_cum"];

impl EntropyTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, h: f64, i: f64, l1: f64, kr: KrBracket, qv_cum: f64) {
        self.times.push(t);
        self.entropy.push(h);
        self.fisher.push(i);
        self.l1.push(l1);
        self.kr_lo.push(kr.lower);
        self.kr_hi.push(kr.upper);
        self.qv_cum.push(qv_cum);
    }

    pub fn row(&self, k: usize) -> [f64; 7] {
        [self.times[k], self.entropy[k], self.fisher[k], self.l1[k], self.kr_lo[k], self.kr_hi[k], self.qv_cum[k]]
    }

    pub fn sup_entropy(&self) -> f64 {
        self.entropy.iter().cloned().fold(0.0, f64::max)
    }

    /// Violations of the per-snapshot invariants (Gibbs, CKP with constant 2,
    /// ranges, bracket order), one message each.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.times.len();
        for (name, col) in [
            ("H", &self.entropy),
            ("I", &self.fisher),
            ("l1", &self.l1),
            ("kr_lo", &self.kr_lo),
            ("kr_hi", &self.kr_hi),
            ("qv_cum", &self.qv_cum),
        ] {
            if col.len() != n {
                out.push(format!("column {name} has {} rows, expected {n}", col.len()));
                return out;
            }
        }
        for k in 0..n {
            let [t, h, i, l1, lo, hi, _] = self.row(k);
            if h < -tol {
                out.push(format!("t = {t}: H = {h:e} < 0"));
            }
            if i < -tol {
                out.push(format!("t = {t}: I = {i:e} < 0"));
            }
            if !(-tol..=2.0 + tol).contains(&l1) {
                out.push(format!("t = {t}: l1 = {l1} outside [0, 2]"));
            }
            if l1 * l1 > 2.0 * h + tol {
                out.push(format!("t = {t}: CKP fails, l1² = {:e} > 2H = {:e}", l1 * l1, 2.0 * h));
            }
            if lo > hi + tol || lo < -tol || hi > 2.0 + tol {
                out.push(format!("t = {t}: KR bracket [{lo}, {hi}] invalid"));
            }
        }
        out
    }
}

/// Mean of a measure on a grid; used to center KR dictionaries and windows.
pub fn grid_mean(f: &ScalarField) -> Vec2 {
    let g = f.geom;
    let m = g.points;
    let mut acc = Vec2::ZERO;
    let mut mass = 0.0;
    for (k, &v) in f.values.iter().enumerate() {
        acc += g.node(k / m, k % m) * v;
        mass += v;
    }
    acc * (1.0 / mass)
}
