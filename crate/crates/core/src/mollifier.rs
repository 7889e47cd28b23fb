//! The exponential mollifier `V(y) = C̄ exp(-sqrt(1 + |y|²))` and its
//! moderate-interaction scaling `V^N(y) = N^β V(N^{β/2} y)` in two dimensions.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2, DIM};

/// `∫_{R²} exp(-sqrt(1+|y|²)) dy = 2π ∫_1^∞ u e^{-u} du = 4π/e`, so the
/// normalization is `e / (4π)`.
pub const C_BAR: f64 = std::f64::consts::E / (4.0 * std::f64::consts::PI);

/// Pointwise profile of a candidate mollifier, used by the assumption checker.
pub trait Profile {
    fn value(&self, y: Vec2) -> f64;
    fn gradient(&self, y: Vec2) -> Vec2;
}

/// The unscaled exponential mollifier.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpMollifier;

impl Profile for ExpMollifier {
    fn value(&self, y: Vec2) -> f64 {
        eval_v(y)
    }

    fn gradient(&self, y: Vec2) -> Vec2 {
        let s = (1.0 + y.norm_sq()).sqrt();
        y * (-eval_v(y) / s)
    }
}

pub fn eval_v(y: Vec2) -> f64 {
    C_BAR * (-(1.0 + y.norm_sq()).sqrt()).exp()
}

/// Scaling data `(β, α, N)` of the moderate interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub beta: f64,
    pub alpha: f64,
    pub n: usize,
}

/// Upper ends of the admissible `β` range: `(1/(2(1+1/d)), 1/(1+2/d+2α))`.
pub fn beta_bounds(alpha: f64) -> (f64, f64) {
    let d = DIM as f64;
    (1.0 / (2.0 * (1.0 + 1.0 / d)), 1.0 / (1.0 + 2.0 / d + 2.0 * alpha))
}

pub fn check_beta_alpha(beta: f64, alpha: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Inadmissible(format!("beta = {beta} must lie in (0, 1)")));
    }
    if !(alpha > DIM as f64 / 2.0) || !alpha.is_finite() {
        return Err(Error::Inadmissible(format!("alpha = {alpha} must exceed d/2 = 1")));
    }
    let (b1, b2) = beta_bounds(alpha);
    if beta >= b1 {
        return Err(Error::Inadmissible(format!(
            "beta = {beta} violates beta < 1/(2(1+1/d)) = {b1:.6}"
        )));
    }
    if beta >= b2 {
        return Err(Error::Inadmissible(format!(
            "beta = {beta} violates beta < 1/(1+2/d+2*alpha) = {b2:.6} (alpha = {alpha})"
        )));
    }
    Ok(())
}

impl MollifierSpec {
    /// Rejects `β` outside the admissible intersection and `α ≤ d/2`.
    pub fn new(beta: f64, alpha: f64, n: usize) -> Result<Self> {
        check_beta_alpha(beta, alpha)?;
        if n == 0 {
            return Err(Error::Config("particle count N must be at least 1".into()));
        }
        Ok(Self { beta, alpha, n })
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.beta, self.alpha, n)
    }

    /// `N^β`, the amplitude of `V^N` relative to `V`; also the stopping radius.
    pub fn amplitude(&self) -> f64 {
        (self.n as f64).powf(self.beta)
    }

    /// `N^{β/d}`, the inverse length scale of `V^N`.
    pub fn inverse_width(&self) -> f64 {
        (self.n as f64).powf(self.beta / DIM as f64)
    }

    /// Mollifier bandwidth `N^{-β/d}`.
    pub fn bandwidth(&self) -> f64 {
        1.0 / self.inverse_width()
    }

    pub fn peak(&self) -> f64 {
        self.amplitude() * eval_v(Vec2::ZERO)
    }

    /// Mass of `V^N` outside the disc of radius `r`, in closed form:
    /// `2π C̄ (u₀ + 1) e^{-u₀}` with `u₀ = sqrt(1 + (N^{β/2} r)²)`.
    pub fn tail_mass(&self, r: f64) -> f64 {
        let u0 = (1.0 + (self.inverse_width() * r).powi(2)).sqrt();
        2.0 * std::f64::consts::PI * C_BAR * (u0 + 1.0) * (-u0).exp()
    }

    /// Radius beyond which `V^N` drops below `rel` times its peak.
    pub fn cutoff_radius(&self, rel: f64) -> f64 {
        // exp(1 - u) = rel
        let u = 1.0 - rel.ln();
        (u * u - 1.0).sqrt() / self.inverse_width()
    }
}

pub fn eval_vn(spec: &MollifierSpec, y: Vec2) -> f64 {
    spec.amplitude() * eval_v(y * spec.inverse_width())
}

/// `V^N(y)` and `|∇V^N(y)|²` from a single exponential.
#[inline]
pub fn vn_and_grad_sq(amp: f64, inv_w: f64, d: Vec2) -> (f64, f64) {
    let r2 = d.norm_sq() * inv_w * inv_w;
    let s = (1.0 + r2).sqrt();
    let v = amp * C_BAR * (-s).exp();
    // |∇V^N| = V^N · N^{β/2} · |z| / sqrt(1+|z|²), z = N^{β/2} y
    let g2 = v * v * inv_w * inv_w * r2 / (1.0 + r2);
    (v, g2)
}

pub fn grad_vn(spec: &MollifierSpec, y: Vec2) -> Vec2 {
    let w = spec.inverse_width();
    ExpMollifier.gradient(y * w) * (spec.amplitude() * w)
}

/// Outcome of sampling the two inequalities `|∇V| ≤ C_d V` and
/// `V(y) ≤ C_d (1+|y|²)^{-α}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `max |∇V| / V` over the samples.
    pub gradient_constant: f64,
    /// `max V(y)(1+|y|²)^α` over the samples.
    pub decay_constant: f64,
    pub declared_constant: f64,
    pub sample_radius: f64,
    pub violations: Vec<String>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples a polar grid of radius `radius` and reports the smallest constants
/// satisfying both mollifier inequalities, flagging any that exceed `c_d`.
pub fn check_profile<P: Profile>(profile: &P, alpha: f64, c_d: f64, radius: f64) -> AssumptionReport {
    let n_r = 1200;
    let n_phi = 64;
    let mut grad_c: f64 = 0.0;
    let mut decay_c: f64 = 0.0;
    let mut violations = Vec::new();
    let mut worst_grad = Vec2::ZERO;
    let mut worst_decay = Vec2::ZERO;
    for ir in 0..=n_r {
        let r = radius * ir as f64 / n_r as f64;
        for ip in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / n_phi as f64;
            let y = Vec2::new(r * phi.cos(), r * phi.sin());
            let v = profile.value(y);
            if !(v > 0.0) {
                if v < 0.0 || v.is_nan() {
                    violations.push(format!("V({}, {}) = {v} is not positive", y.x1, y.x2));
                }
                continue;
            }
            let ratio = profile.gradient(y).norm() / v;
            if ratio > grad_c {
                grad_c = ratio;
                worst_grad = y;
            }
            let dec = v * (1.0 + r * r).powf(alpha);
            if dec > decay_c {
                decay_c = dec;
                worst_decay = y;
            }
        }
    }
    let tol = 1.0 + 1e-12;
    if grad_c > c_d * tol {
        violations.push(format!(
            "|grad V| <= C_d V fails: ratio {grad_c:.6} > {c_d} at ({:.3}, {:.3})",
            worst_grad.x1, worst_grad.x2
        ));
    }
    if decay_c > c_d * tol {
        violations.push(format!(
            "V <= C_d (1+|y|^2)^-alpha fails: constant {decay_c:.6} > {c_d} at ({:.3}, {:.3})",
            worst_decay.x1, worst_decay.x2
        ));
    }
    AssumptionReport {
        gradient_constant: grad_c,
        decay_constant: decay_c,
        declared_constant: c_d,
        sample_radius: radius,
        violations,
    }
}

/// Assumption check for the exponential mollifier with `C_d = 1` on `|y| ≤ 60`.
pub fn check_assumption_av(spec: &MollifierSpec) -> AssumptionReport {
    check_profile(&ExpMollifier, spec.alpha, 1.0, 60.0)
}
