//! Euler–Maruyama integration of the N-particle system
//! `dX^i = (1/N) Σ_k (K*V^N)(X^i - X^k) dt + √2 dW^i + σ_t dB`.
//!
//! Positions are stored as `X^i = Y^i + O_t` where `O_t = Σ σ ΔB` is the
//! accumulated common displacement. Pairwise differences only involve `Y`, so
//! runs that differ only in `σ` have bit-identical relative configurations.
//!
//! RNG streams: every run draws from `ChaCha8` seeded with the master seed and
//! stream id `4 * run + purpose` (see [`StreamPurpose`]).

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::fields::ScalarField;
use crate::kernels::{biot_savart_multiplier, KernelTable};
use crate::spectral::{is_nyquist, wavenumbers, Fft2};
use crate::{Error, Mat2, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Initial = 0,
    Individual = 1,
    Common = 2,
    Auxiliary = 3,
}

/// Independent stream for `(master seed, run index, purpose)`.
pub fn stream_rng(master: u64, run: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(run.wrapping_mul(4).wrapping_add(purpose as u64));
    rng
}

#[derive(Debug, Clone)]
pub enum InitialDensity {
    /// Isotropic Gaussian with the given per-coordinate variance.
    Gaussian { mean: Vec2, variance: f64 },
    Grid(ScalarField),
}

impl InitialDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialDensity::Gaussian { mean, variance } => {
                if !mean.is_finite() || !variance.is_finite() {
                    return Err(Error::Config("initial Gaussian has non-finite parameters".into()));
                }
                if *variance <= 0.0 {
                    return Err(Error::PointMass);
                }
                Ok(())
            }
            InitialDensity::Grid(f) => {
                f.check_density(1e-6)?;
                if f.min() < 0.0 {
                    return Err(Error::NotNormalized(f.mass()));
                }
                // all mass in one cell is a discretized Dirac
                if f.peak() * f.geom.cell_area() > 0.5 {
                    return Err(Error::PointMass);
                }
                Ok(())
            }
        }
    }

    /// Density value; bilinear for grids.
    pub fn eval(&self, x: Vec2) -> f64 {
        match self {
            InitialDensity::Gaussian { mean, variance } => {
                (-(x - *mean).norm_sq() / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance)
            }
            InitialDensity::Grid(f) => f.sample_bilinear(x),
        }
    }
}

/// N i.i.d. draws from `rho0`: inverse CDF for Gaussians, rejection against a
/// fitted Gaussian envelope for grid densities.
pub fn sample_initial<R: Rng + ?Sized>(n: usize, rho0: &InitialDensity, rng: &mut R) -> Result<ParticleEnsemble> {
    if n == 0 {
        return Err(Error::Config("particle count N must be at least 1".into()));
    }
    rho0.validate()?;
    let positions = match rho0 {
        InitialDensity::Gaussian { mean, variance } => {
            let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| Error::Config(e.to_string()))?;
            (0..n)
                .map(|_| {
                    let u1: f64 = Open01.sample(rng);
                    let u2: f64 = Open01.sample(rng);
                    *mean + Vec2::new(normal.inverse_cdf(u1), normal.inverse_cdf(u2))
                })
                .collect()
        }
        InitialDensity::Grid(f) => rejection_sample(n, rho0, f, rng)?,
    };
    Ok(ParticleEnsemble::new(positions))
}

fn rejection_sample<R: Rng + ?Sized>(n: usize, rho0: &InitialDensity, f: &ScalarField, rng: &mut R) -> Result<Vec<Vec2>> {
    let g = f.geom;
    let area = g.cell_area();
    let m = g.points;
    let mut mean = Vec2::ZERO;
    for k in 0..m * m {
        mean += g.node(k / m, k % m) * (f.values[k] * area);
    }
    let mut var = 0.0;
    for k in 0..m * m {
        var += (g.node(k / m, k % m) - mean).norm_sq() * f.values[k] * area;
    }
    // inflated envelope so the ratio stays bounded in the tails
    let var = (var / 2.0).max(g.spacing().powi(2)) * 2.0;
    let envelope = InitialDensity::Gaussian { mean, variance: var };
    let mut c: f64 = 0.0;
    for k in 0..m * m {
        let x = g.node(k / m, k % m);
        c = c.max(f.values[k] / envelope.eval(x));
    }
    let c = c * 1.25;
    let sd = var.sqrt();
    let mut out = Vec::with_capacity(n);
    let max_tries = 10_000 * n.max(100);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        if tries > max_tries {
            return Err(Error::SampleSize("rejection sampler acceptance rate too low".into()));
        }
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let x = mean + Vec2::new(z1, z2) * sd;
        let u: f64 = rng.random();
        if u * c * envelope.eval(x) < rho0.eval(x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Particle positions `Y^i + offset` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub rel: Vec<Vec2>,
    pub offset: Vec2,
    pub t: f64,
}

impl ParticleEnsemble {
    pub fn new(positions: Vec<Vec2>) -> Self {
        Self { rel: positions, offset: Vec2::ZERO, t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.rel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel.is_empty()
    }

    pub fn position(&self, i: usize) -> Vec2 {
        self.rel[i] + self.offset
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.rel.iter().map(|&y| y + self.offset).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.offset.is_finite() && self.rel.iter().all(|p| p.is_finite())
    }

    /// Largest `|X^i|`.
    pub fn max_radius(&self) -> f64 {
        self.rel.iter().map(|&y| (y + self.offset).norm()).fold(0.0, f64::max)
    }
}

/// Time-only diffusion matrix of the common noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SigmaSchedule {
    Constant { matrix: [[f64; 2]; 2] },
    /// `matrices[k]` applies on `[times[k], times[k+1])`; the last one
    /// extends to infinity.
    Piecewise { times: Vec<f64>, matrices: Vec<[[f64; 2]; 2]> },
}

impl SigmaSchedule {
    pub fn zero() -> Self {
        Self::Constant { matrix: [[0.0; 2]; 2] }
    }

    pub fn identity() -> Self {
        Self::scaled_identity(1.0)
    }

    pub fn scaled_identity(c: f64) -> Self {
        Self::Constant { matrix: [[c, 0.0], [0.0, c]] }
    }

    pub fn at(&self, t: f64) -> Mat2 {
        match self {
            SigmaSchedule::Constant { matrix } => Mat2 { rows: *matrix },
            SigmaSchedule::Piecewise { times, matrices } => {
                let k = times.partition_point(|&s| s <= t).saturating_sub(1);
                Mat2 { rows: matrices[k.min(matrices.len() - 1)] }
            }
        }
    }

    /// `sup_t ‖σ_t‖`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            SigmaSchedule::Constant { matrix } => Mat2 { rows: *matrix }.op_norm(),
            SigmaSchedule::Piecewise { matrices, .. } => {
                matrices.iter().map(|m| Mat2 { rows: *m }.op_norm()).fold(0.0, f64::max)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SigmaSchedule::Constant { matrix } => {
                if !(Mat2 { rows: *matrix }).is_finite() {
                    return Err(Error::Config("sigma must be finite".into()));
                }
            }
            SigmaSchedule::Piecewise { times, matrices } => {
                if times.is_empty() || times.len() != matrices.len() {
                    return Err(Error::Config("piecewise sigma needs one matrix per breakpoint".into()));
                }
                if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("sigma breakpoints must start at 0 and increase".into()));
                }
                if matrices.iter().any(|m| !Mat2 { rows: *m }.is_finite()) {
                    return Err(Error::Config("sigma must be finite".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub seed: u64,
    pub run: u64,
    pub dt: f64,
    pub sigma: SigmaSchedule,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        self.sigma.validate()
    }
}

/// Raw common Brownian increments `ΔB_k`, one per step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommonNoiseRecord {
    pub dt: f64,
    pub increments: Vec<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DriftMethod {
    /// Pairwise sum over the interpolated table.
    #[default]
    Direct,
    /// Cloud-in-cell scatter, FFT convolution, gather.
    Mesh,
}

/// Drift on particle `i`, including the self term.
pub fn drift(ensemble: &ParticleEnsemble, table: &KernelTable, i: usize) -> Result<Vec2> {
    let yi = ensemble.rel[i];
    let mut acc = Vec2::ZERO;
    for &yk in &ensemble.rel {
        acc += table.interpolate(yi - yk)?;
    }
    Ok(acc * (1.0 / ensemble.len() as f64))
}

/// Drift on every particle.
pub fn drift_all(rel: &[Vec2], table: &KernelTable, method: DriftMethod) -> Result<Vec<Vec2>> {
    match method {
        DriftMethod::Direct => direct_drift(rel, table),
        // the mesh only covers half the table period around the centroid
        DriftMethod::Mesh => match mesh_drift(rel, table) {
            Err(Error::OutOfBox { .. }) => direct_drift(rel, table),
            other => other,
        },
    }
}

fn direct_drift(rel: &[Vec2], table: &KernelTable) -> Result<Vec<Vec2>> {
    let n = rel.len();
    let mut out = vec![Vec2::ZERO; n];
    for i in 0..n {
        let yi = rel[i];
        let mut acc = Vec2::ZERO;
        for k in (i + 1)..n {
            let v = table.interpolate_raw(yi - rel[k])?;
            acc += v;
            out[k] -= v;
        }
        out[i] += acc;
    }
    let inv = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v = *v * inv);
    Ok(out)
}

fn mesh_drift(rel: &[Vec2], table: &KernelTable) -> Result<Vec<Vec2>> {
    let n = rel.len();
    let geom = table.field.geom;
    let m = geom.points;
    let h = geom.spacing();
    let mut center = Vec2::ZERO;
    for &p in rel {
        center += p;
    }
    let center = center * (1.0 / n as f64);
    // convolution wraps at half the period
    let limit = geom.half_width / 2.0 - 2.0 * h;
    if let Some(p) = rel.iter().find(|&&p| (p - center).max_abs() >= limit) {
        let d = *p - center;
        return Err(Error::OutOfBox { x1: d.x1, x2: d.x2, half_width: limit });
    }
    let half = (m / 2) as f64;
    let cic = |p: Vec2| {
        let s1 = (p.x1 - center.x1) / h + half;
        let s2 = (p.x2 - center.x2) / h + half;
        let (i0, j0) = (s1.floor(), s2.floor());
        (i0 as usize, j0 as usize, s1 - i0, s2 - j0)
    };
    let w = 1.0 / n as f64;
    let mut rho = vec![Complex64::new(0.0, 0.0); m * m];
    for &p in rel {
        let (i, j, a, b) = cic(p);
        rho[i * m + j].re += w * (1.0 - a) * (1.0 - b);
        rho[i * m + j + 1].re += w * (1.0 - a) * b;
        rho[(i + 1) * m + j].re += w * a * (1.0 - b);
        rho[(i + 1) * m + j + 1].re += w * a * b;
    }
    let fft = Fft2::new(m);
    fft.forward(&mut rho);
    let k = wavenumbers(m, geom.half_width);
    let sinc = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
    let mut u1 = vec![Complex64::new(0.0, 0.0); m * m];
    let mut u2 = u1.clone();
    for a in 0..m {
        for b in 0..m {
            if is_nyquist(a, m) || is_nyquist(b, m) {
                continue;
            }
            let idx = a * m + b;
            let s = sinc(k[a] * h / 2.0) * sinc(k[b] * h / 2.0);
            let filt = table.vn_dft[idx] / s.powi(4);
            let [m1, m2] = biot_savart_multiplier(k[a], k[b]);
            u1[idx] = rho[idx] * m1 * filt;
            u2[idx] = rho[idx] * m2 * filt;
        }
    }
    let u1 = fft.inverse_real(u1);
    let u2 = fft.inverse_real(u2);
    let gather = |f: &[f64], p: Vec2| {
        let (i, j, a, b) = cic(p);
        f[i * m + j] * (1.0 - a) * (1.0 - b)
            + f[i * m + j + 1] * (1.0 - a) * b
            + f[(i + 1) * m + j] * a * (1.0 - b)
            + f[(i + 1) * m + j + 1] * a * b
    };
    let mut out: Vec<Vec2> = rel.iter().map(|&p| Vec2::new(gather(&u1, p), gather(&u2, p))).collect();
    if let Some(torus) = table.torus_correction() {
        let local: Vec<Vec2> = rel.iter().map(|&p| p - center).collect();
        for (o, c) in out.iter_mut().zip(torus.summed(&local, &local)) {
            *o += c * w;
        }
    }
    Ok(out)
}

/// One explicit Euler–Maruyama step with the given increments.
pub fn step_em(
    ensemble: &ParticleEnsemble,
    table: &KernelTable,
    sigma: &SigmaSchedule,
    dt: f64,
    dw: &[Vec2],
    db: Vec2,
    method: DriftMethod,
) -> Result<ParticleEnsemble> {
    let b = drift_all(&ensemble.rel, table, method)?;
    let s2 = std::f64::consts::SQRT_2;
    let rel = ensemble.rel.iter().zip(&b).zip(dw).map(|((&y, &v), &w)| y + v * dt + w * s2).collect();
    Ok(ParticleEnsemble {
        rel,
        offset: ensemble.offset + sigma.at(ensemble.t).apply(db),
        t: ensemble.t + dt,
    })
}

/// The common increments a [`ParticleRun`] with the same `(seed, run, dt)`
/// would draw in its first `steps` steps.
pub fn common_record(seed: u64, run: u64, dt: f64, steps: usize) -> CommonNoiseRecord {
    let mut rng = stream_rng(seed, run, StreamPurpose::Common);
    let sq = dt.sqrt();
    let increments = (0..steps)
        .map(|_| {
            let c1: f64 = StandardNormal.sample(&mut rng);
            let c2: f64 = StandardNormal.sample(&mut rng);
            Vec2::new(c1, c2) * sq
        })
        .collect();
    CommonNoiseRecord { dt, increments }
}

/// A running simulation owning its noise streams and the common-noise record.
#[derive(Debug, Clone)]
pub struct ParticleRun<'a> {
    pub ensemble: ParticleEnsemble,
    pub record: CommonNoiseRecord,
    pub steps: usize,
    table: Option<&'a KernelTable>,
    noise: NoiseConfig,
    method: DriftMethod,
    individual: ChaCha8Rng,
    common: ChaCha8Rng,
}

impl<'a> ParticleRun<'a> {
    /// `table = None` runs the interaction-free system.
    pub fn new(ensemble: ParticleEnsemble, table: Option<&'a KernelTable>, noise: NoiseConfig, method: DriftMethod) -> Result<Self> {
        noise.validate()?;
        let individual = stream_rng(noise.seed, noise.run, StreamPurpose::Individual);
        let common = stream_rng(noise.seed, noise.run, StreamPurpose::Common);
        Ok(Self {
            ensemble,
            record: CommonNoiseRecord { dt: noise.dt, increments: Vec::new() },
            steps: 0,
            table,
            noise,
            method,
            individual,
            common,
        })
    }

    pub fn advance(&mut self) -> Result<()> {
        let dt = self.noise.dt;
        let sq = dt.sqrt();
        let n = self.ensemble.len();
        let mut normal = || -> f64 { StandardNormal.sample(&mut self.individual) };
        let dw: Vec<Vec2> = (0..n).map(|_| Vec2::new(normal(), normal()) * sq).collect();
        let c1: f64 = StandardNormal.sample(&mut self.common);
        let c2: f64 = StandardNormal.sample(&mut self.common);
        let db = Vec2::new(c1, c2) * sq;
        self.ensemble = match self.table {
            Some(t) => step_em(&self.ensemble, t, &self.noise.sigma, dt, &dw, db, self.method)?,
            None => {
                let s2 = std::f64::consts::SQRT_2;
                ParticleEnsemble {
                    rel: self.ensemble.rel.iter().zip(&dw).map(|(&y, &w)| y + w * s2).collect(),
                    offset: self.ensemble.offset + self.noise.sigma.at(self.ensemble.t).apply(db),
                    t: self.ensemble.t + dt,
                }
            }
        };
        self.record.increments.push(db);
        self.steps += 1;
        Ok(())
    }
}

/// Stopping-time summary `τ^N = inf{t : ∃i, |X^i_t| ≥ N^β} ∧ T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    pub tau: f64,
    pub radius: f64,
    pub exited: bool,
}

/// Ensembles at every step, starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub dt: f64,
    pub frames: Vec<ParticleEnsemble>,
}

pub fn exit_radius(beta: f64, n: usize) -> f64 {
    (n as f64).powf(beta)
}

pub fn has_exited(ensemble: &ParticleEnsemble, radius: f64) -> bool {
    let r2 = radius * radius;
    ensemble.rel.iter().any(|&y| (y + ensemble.offset).norm_sq() >= r2)
}

pub fn exit_time(trajectory: &Trajectory, beta: f64, n: usize, t_end: f64) -> ExitRecord {
    let radius = exit_radius(beta, n);
    for frame in &trajectory.frames {
        if frame.t > t_end {
            break;
        }
        if has_exited(frame, radius) {
            return ExitRecord { tau: frame.t.min(t_end), radius, exited: true };
        }
    }
    ExitRecord { tau: t_end, radius, exited: false }
}
