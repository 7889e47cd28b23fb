//! Paired particle/limit runs driven by one common-noise path, N-sweeps,
//! rate fits and exit statistics.
//!
//! All entropy-type diagnostics are evaluated in the frame moving with
//! `X_t`: node `y` of the diagnostic grid stands for the lab point `X_t + y`,
//! where `ρ(t, X_t + y) = ρ̃(t, y)` and `ρ^N(t, X_t + y) = (1/N) Σ V^N(y - Y^i)`.
//! Both densities are renormalized on a fixed window where `ρ̃₀` is above
//! `window_floor · peak`, so `H` is the entropy of the conditional laws.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::{ExperimentConfig, InitialSection};
use crate::fields::{density_and_qv_rate, shift_field, GridField, GridGeometry, ScalarField, ShiftMethod};
use crate::infometrics::{
    fisher_information, kr_distance, l1_distance, qv_cumulative, relative_entropy, EntropyTrace, KrOptions, Measure,
};
use crate::kernels::{build_interaction_table, table_dimensions, KernelTable};
use crate::mollifier::{check_beta_alpha, MollifierSpec};
use crate::particles::{
    exit_radius, has_exited, sample_initial, stream_rng, DriftMethod, ExitRecord, InitialDensity, NoiseConfig,
    ParticleEnsemble, ParticleRun, StreamPurpose,
};
use crate::pde::{sample_shift_path, snapshot_steps, solve_vorticity, LimitSolution, ShiftPath};
use crate::{Error, Result, Vec2, DIM};

pub const MIN_SEEDS: usize = 4;
/// Smallest accepted entropy-window half-size, in cells.
pub const MIN_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTargets {
    pub theta1: f64,
    pub theta2: f64,
    pub delta: f64,
    /// `min(θ₁, θ₂) - δ`.
    pub theta: f64,
    /// `min(θ₂, θ₁ - δ)`, the variant with `δ` on `θ₁` only.
    pub theta_alt: f64,
}

pub fn rate_targets(beta: f64, alpha: f64, delta: f64) -> Result<RateTargets> {
    check_beta_alpha(beta, alpha)?;
    if !(delta > 0.0) {
        return Err(Error::Inadmissible(format!("delta = {delta} must be positive")));
    }
    let d = DIM as f64;
    let theta1 = 0.5 - beta * (1.0 + 1.0 / d);
    let theta2 = 1.0 - beta * (1.0 + 2.0 / d + 2.0 * alpha);
    let theta = theta1.min(theta2) - delta;
    if theta <= 0.0 {
        return Err(Error::Inadmissible(format!("theta = {theta} is not positive")));
    }
    Ok(RateTargets { theta1, theta2, delta, theta, theta_alt: theta2.min(theta1 - delta) })
}

/// Deterministic limit data shared by every run of one configuration.
#[derive(Debug, Clone)]
pub struct LimitContext {
    pub initial: InitialDensity,
    pub solution: LimitSolution,
    /// Particle steps at which snapshots are taken.
    pub steps: Vec<usize>,
    pub n_steps: usize,
    /// Entropy window, centered at the origin of the moving frame.
    pub window: GridGeometry,
    pub window_k: usize,
    /// `ρ̃` restricted to the window and renormalized, per snapshot.
    pub g_window: Vec<ScalarField>,
    /// Grid of the fused density/quadratic-variation pass.
    pub diag: GridGeometry,
    pub diag_k: usize,
    /// `sup_t H(ρ̃_W | resampled ρ̃_W)`.
    pub h_floor: f64,
}

/// `ρ₀` on the PDE grid, renormalized to unit grid mass.
pub fn initial_field(cfg: &ExperimentConfig) -> Result<(InitialDensity, ScalarField)> {
    let geom = cfg.pde_geometry()?;
    match &cfg.initial {
        InitialSection::Gaussian { mean, variance } => {
            let mean = Vec2::new(mean[0], mean[1]);
            let rho = InitialDensity::Gaussian { mean, variance: *variance };
            rho.validate()?;
            let f = GridField::from_fn(geom, |x| rho.eval(x)).normalized()?;
            Ok((rho, f))
        }
        InitialSection::Grid { path } => {
            let f = crate::io::read_scalar_field(Path::new(path))?;
            let same = f.geom.points == geom.points && (f.geom.half_width - geom.half_width).abs() < 1e-12;
            if !same {
                return Err(Error::Config(format!("initial field {path} does not match the PDE grid")));
            }
            let rho = InitialDensity::Grid(f.clone());
            rho.validate()?;
            Ok((rho, f.normalized()?))
        }
    }
}

/// Solves the limit once and prepares the windowed limit densities.
pub fn build_limit_context(cfg: &ExperimentConfig) -> Result<LimitContext> {
    cfg.validate()?;
    let (initial, rho0) = initial_field(cfg)?;
    let n_steps = cfg.sde_steps();
    let steps = snapshot_steps(n_steps, cfg.pde.snapshots);
    let times: Vec<f64> = steps.iter().map(|&s| s as f64 * cfg.noise.dt).collect();
    let solution = solve_vorticity(&rho0, &times, &cfg.pde.solver_options())?;
    let geom = rho0.geom;
    let m = geom.points;
    let peak = rho0.peak();
    let floor = cfg.diagnostics.window_floor * peak;
    // largest centered box on which every snapshot stays above the floor
    let c = m / 2;
    let mut k = 0usize;
    'grow: while k + 1 < c {
        let r = k + 1;
        for s in &solution.snapshots {
            let v = &s.field.values;
            for a in c - r..=c + r {
                for b in [c - r, c + r] {
                    if v[a * m + b] < floor || v[b * m + a] < floor {
                        break 'grow;
                    }
                }
            }
        }
        k = r;
    }
    if k < MIN_WINDOW {
        return Err(Error::Config(format!("entropy window has only {k} cells per side above the floor")));
    }
    let window = geom.sub_box(k)?;
    let mut g_window = Vec::with_capacity(solution.snapshots.len());
    let mut h_floor: f64 = 0.0;
    let half_cell = Vec2::new(geom.spacing() / 2.0, geom.spacing() / 2.0);
    for s in &solution.snapshots {
        let g = s.field.sub_field(k)?.normalized()?;
        let copy = shift_field(&shift_field(&s.field, half_cell, ShiftMethod::Bilinear)?, -half_cell, ShiftMethod::Bilinear)?;
        let copy = copy.sub_field(k)?.normalized()?;
        h_floor = h_floor.max(relative_entropy(&g, &copy)?);
        g_window.push(g);
    }
    let diag_k = k.max((cfg.diagnostics.qv_half_width / geom.spacing()).ceil() as usize);
    let diag = GridGeometry::new(Vec2::ZERO, (2 * diag_k + 1) as f64 * geom.spacing() / 2.0, 2 * diag_k + 1)?;
    Ok(LimitContext { initial, solution, steps, n_steps, window, window_k: k, g_window, diag, diag_k, h_floor })
}

/// Table for particle count `n` covering every separation before the
/// stopping time (`2 N^β`) with a margin.
pub fn table_for(cfg: &ExperimentConfig, n: usize) -> Result<KernelTable> {
    let spec = MollifierSpec::new(cfg.mollifier.beta, cfg.mollifier.alpha, n)?;
    let (l, m) = table_dimensions(&spec, 2.1 * exit_radius(spec.beta, n), cfg.grid.table_cells_per_bandwidth);
    build_interaction_table(&spec, l, m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedRun {
    pub n: usize,
    pub run: u64,
    pub trace: EntropyTrace,
    pub exit: ExitRecord,
    pub shift_path: ShiftPath,
    /// Inline invariant failures with the snapshot time in each message.
    pub violations: Vec<String>,
    /// Final ensemble (at `τ^N` if the run stopped).
    pub ensemble: ParticleEnsemble,
}

impl PairedRun {
    pub fn sup_entropy(&self) -> f64 {
        self.trace.sup_entropy()
    }

    /// Quadratic-variation integral up to `T`, if the run was not stopped.
    pub fn qv_total(&self) -> Option<f64> {
        (!self.exit.exited).then(|| self.trace.qv_cum.last().copied()).flatten()
    }
}

/// Entropy-type diagnostics between the particle cloud (relative positions)
/// and snapshot `k` of the limit.
fn diagnostics(
    cfg: &ExperimentConfig,
    ctx: &LimitContext,
    spec: &MollifierSpec,
    positions: &[Vec2],
    center: Vec2,
    k: usize,
    kr_rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<(f64, f64, f64, crate::infometrics::KrBracket, f64)> {
    let (full, qv_rate) = density_and_qv_rate(positions, spec, &ctx.diag.with_center(center))?;
    let f = full.sub_field(ctx.window_k)?.normalized()?;
    let g = ctx.g_window[k].recentered(center);
    let h = relative_entropy(&f, &g)?;
    let i = fisher_information(&f, &g, cfg.diagnostics.gradient)?;
    let l1 = l1_distance(&f, &g)?;
    let opts = KrOptions { samples: cfg.diagnostics.kr_samples, repeats: cfg.diagnostics.kr_repeats };
    let kr = kr_distance(&Measure::Grid(&f), &Measure::Grid(&g), &opts, kr_rng)?;
    Ok((h, i, l1, kr, qv_rate))
}

/// Where the diagnostics are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// Relative positions against `ρ̃`; the common noise cancels exactly.
    #[default]
    CoMoving,
    /// Absolute positions against `ρ̃(· - X_t)`, with `X_t` rebuilt from
    /// the recorded common increments.
    Lab,
}

/// One particle run and its limit, sharing the common noise, with
/// diagnostics at every snapshot until `τ^N`.
pub fn paired_run(cfg: &ExperimentConfig, ctx: &LimitContext, table: &KernelTable, run: u64) -> Result<PairedRun> {
    paired_run_in(cfg, ctx, table, run, Frame::CoMoving)
}

pub fn paired_run_in(
    cfg: &ExperimentConfig,
    ctx: &LimitContext,
    table: &KernelTable,
    run: u64,
    frame: Frame,
) -> Result<PairedRun> {
    let n = table.spec.n;
    let spec = table.spec;
    let seed = cfg.noise.seed;
    let mut init_rng = stream_rng(seed, run, StreamPurpose::Initial);
    let ensemble = sample_initial(n, &ctx.initial, &mut init_rng)?;
    let noise = NoiseConfig { seed, run, dt: cfg.noise.dt, sigma: cfg.noise.sigma.clone() };
    let mut sim = ParticleRun::new(ensemble, Some(table), noise, cfg.noise.drift)?;
    let mut kr_rng = stream_rng(seed, run, StreamPurpose::Auxiliary);
    let radius = exit_radius(spec.beta, n);
    let mut trace = EntropyTrace::default();
    let mut rates = Vec::new();
    let mut exit = ExitRecord { tau: ctx.n_steps as f64 * cfg.noise.dt, radius, exited: false };
    let mut next = 0usize;
    loop {
        if has_exited(&sim.ensemble, radius) {
            exit = ExitRecord { tau: sim.ensemble.t, radius, exited: true };
            break;
        }
        if next < ctx.steps.len() && sim.steps == ctx.steps[next] {
            let (h, i, l1, kr, rate) = match frame {
                Frame::CoMoving => diagnostics(cfg, ctx, &spec, &sim.ensemble.rel, Vec2::ZERO, next, &mut kr_rng)?,
                Frame::Lab => {
                    let t = sim.steps as f64 * cfg.noise.dt;
                    let path = sample_shift_path(&sim.record, &cfg.noise.sigma, t, cfg.noise.dt)?;
                    let x = *path.points.last().unwrap();
                    diagnostics(cfg, ctx, &spec, &sim.ensemble.positions(), x, next, &mut kr_rng)?
                }
            };
            rates.push(rate);
            let times: Vec<f64> = trace.times.iter().cloned().chain([sim.ensemble.t]).collect();
            let qv = *qv_cumulative(&times, &rates).last().unwrap();
            trace.push(sim.ensemble.t, h, i, l1, kr, qv);
            next += 1;
        }
        if sim.steps >= ctx.n_steps {
            break;
        }
        match sim.advance() {
            Ok(()) => {}
            // a pair left the table: the stopping time has fired
            Err(Error::OutOfBox { .. }) => {
                exit = ExitRecord { tau: sim.ensemble.t, radius, exited: true };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let shift_path = sample_shift_path(&sim.record, &cfg.noise.sigma, sim.steps as f64 * cfg.noise.dt, cfg.noise.dt)?;
    let mut violations = trace.violations(cfg.diagnostics.invariant_tolerance);
    let last = *shift_path.points.last().unwrap();
    if last != sim.ensemble.offset {
        violations.push(format!(
            "t = {}: common offset ({}, {}) differs from the shift path ({}, {})",
            sim.ensemble.t, sim.ensemble.offset.x1, sim.ensemble.offset.x2, last.x1, last.x2
        ));
    }
    for v in violations.iter_mut() {
        *v = format!("N = {n}, run {run}: {v}");
    }
    Ok(PairedRun { n, run, trace, exit, shift_path, violations, ensemble: sim.ensemble })
}

/// Run id for the `seed_index`-th seed at the `n_index`-th particle count.
pub fn run_id(n_index: usize, seed_index: usize) -> u64 {
    ((n_index as u64) << 32) | seed_index as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Ordinary least squares with a two-sided 95% Student-t interval.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    let n = x.len();
    if n != y.len() || n < 2 || x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::SampleSize(format!("cannot fit a line to {n} points")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if n == 2 {
        return Ok(SlopeFit { slope, intercept, std_error: f64::INFINITY, ci_low: f64::NEG_INFINITY, ci_high: f64::INFINITY });
    }
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let df = (n - 2) as f64;
    let se = (rss / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::SampleSize(e.to_string()))?.inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, std_error: se, ci_low: slope - t * se, ci_high: slope + t * se })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub ns: Vec<usize>,
    pub seeds: usize,
    /// Median over seeds of `sup_t H`.
    pub sup_h: Vec<f64>,
    /// `sup_h - h_floor`.
    pub sup_h_net: Vec<f64>,
    pub h_floor: f64,
    /// Per-N, per-seed `sup_t H`.
    pub sup_h_runs: Vec<Vec<f64>>,
    pub slope: Option<SlopeFit>,
    pub targets: RateTargets,
    pub exit_fractions: Vec<f64>,
    /// Median over unstopped seeds of the quadratic-variation integral.
    pub qv: Vec<f64>,
    pub qv_slope: Option<SlopeFit>,
    pub violations: Vec<String>,
}

impl RateReport {
    pub fn decreasing(&self) -> bool {
        self.sup_h.windows(2).all(|w| w[1] < w[0])
    }

    pub fn slope_negative_95(&self) -> bool {
        self.slope.as_ref().is_some_and(|s| s.ci_high < 0.0)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["n", "median_sup_h", "median_sup_h_net", "exit_fraction", "median_qv"]).map_err(csv_err)?;
        for k in 0..self.ns.len() {
            w.write_record([
                self.ns[k].to_string(),
                self.sup_h[k].to_string(),
                self.sup_h_net[k].to_string(),
                self.exit_fractions[k].to_string(),
                self.qv[k].to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Decode(format!("{other:?}")),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))
}

/// Paired runs for every `(N, seed)`, median sup-entropy per `N`, and the
/// log–log fit of `median - H_floor` against `N`.
pub fn rate_sweep(cfg: &ExperimentConfig, ctx: &LimitContext) -> Result<(RateReport, Vec<PairedRun>)> {
    let ns = &cfg.sweep.ns;
    let seeds = cfg.sweep.seeds;
    if seeds < MIN_SEEDS {
        return Err(Error::InsufficientSeeds { needed: MIN_SEEDS, got: seeds });
    }
    let targets = rate_targets(cfg.mollifier.beta, cfg.mollifier.alpha, cfg.sweep.delta)?;
    let pool = pool(cfg.output.workers)?;
    let mut runs = Vec::with_capacity(ns.len() * seeds);
    for (a, &n) in ns.iter().enumerate() {
        let spec = MollifierSpec::new(cfg.mollifier.beta, cfg.mollifier.alpha, n)?;
        ctx.window.check_resolution(&spec, cfg.grid.cells_per_bandwidth)?;
        let table = table_for(cfg, n)?;
        let batch: Result<Vec<PairedRun>> =
            pool.install(|| (0..seeds).into_par_iter().map(|b| paired_run(cfg, ctx, &table, run_id(a, b))).collect());
        runs.extend(batch?);
    }
    let mut sup_h = Vec::new();
    let mut sup_h_runs = Vec::new();
    let mut exit_fractions = Vec::new();
    let mut qv = Vec::new();
    let mut violations = Vec::new();
    for chunk in runs.chunks(seeds) {
        let s: Vec<f64> = chunk.iter().map(|r| r.sup_entropy()).collect();
        sup_h.push(median(&s));
        sup_h_runs.push(s);
        exit_fractions.push(chunk.iter().filter(|r| r.exit.exited).count() as f64 / seeds as f64);
        let q: Vec<f64> = chunk.iter().filter_map(|r| r.qv_total()).collect();
        qv.push(median(&q));
        violations.extend(chunk.iter().flat_map(|r| r.violations.iter().cloned()));
    }
    let sup_h_net: Vec<f64> = sup_h.iter().map(|h| h - ctx.h_floor).collect();
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let slope = fit_slope(&x, &sup_h_net.iter().map(|v| v.ln()).collect::<Vec<_>>()).ok();
    let qv_slope = fit_slope(&x, &qv.iter().map(|v| v.ln()).collect::<Vec<_>>()).ok();
    let report = RateReport {
        ns: ns.clone(),
        seeds,
        sup_h,
        sup_h_net,
        h_floor: ctx.h_floor,
        sup_h_runs,
        slope,
        targets,
        exit_fractions,
        qv,
        qv_slope,
        violations,
    };
    Ok((report, runs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitStatistics {
    pub ns: Vec<usize>,
    pub seeds: usize,
    pub fractions: Vec<f64>,
    pub taus: Vec<Vec<f64>>,
}

impl ExitStatistics {
    pub fn non_increasing(&self) -> bool {
        self.fractions.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Particle-only runs up to `T` (or `τ^N`) for every `(N, seed)`.
pub fn exit_sweep(cfg: &ExperimentConfig, ctx: &LimitContext, seeds: usize, method: DriftMethod) -> Result<ExitStatistics> {
    let pool = pool(cfg.output.workers)?;
    let mut fractions = Vec::new();
    let mut taus = Vec::new();
    for (a, &n) in cfg.sweep.ns.iter().enumerate() {
        let table = table_for(cfg, n)?;
        let radius = exit_radius(cfg.mollifier.beta, n);
        let batch: Result<Vec<ExitRecord>> = pool.install(|| {
            (0..seeds)
                .into_par_iter()
                .map(|b| {
                    let run = run_id(a, b);
                    let mut rng = stream_rng(cfg.noise.seed, run, StreamPurpose::Initial);
                    let ens = sample_initial(n, &ctx.initial, &mut rng)?;
                    let noise = NoiseConfig { seed: cfg.noise.seed, run, dt: cfg.noise.dt, sigma: cfg.noise.sigma.clone() };
                    let mut sim = ParticleRun::new(ens, Some(&table), noise, method)?;
                    loop {
                        if has_exited(&sim.ensemble, radius) {
                            return Ok(ExitRecord { tau: sim.ensemble.t, radius, exited: true });
                        }
                        if sim.steps >= ctx.n_steps {
                            return Ok(ExitRecord { tau: sim.ensemble.t, radius, exited: false });
                        }
                        match sim.advance() {
                            Ok(()) => {}
                            Err(Error::OutOfBox { .. }) => return Ok(ExitRecord { tau: sim.ensemble.t, radius, exited: true }),
                            Err(e) => return Err(e),
                        }
                    }
                })
                .collect()
        });
        let batch = batch?;
        fractions.push(batch.iter().filter(|r| r.exited).count() as f64 / seeds as f64);
        taus.push(batch.iter().map(|r| r.tau).collect());
    }
    Ok(ExitStatistics { ns: cfg.sweep.ns.clone(), seeds, fractions, taus })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_at_the_reference_point() {
        let t = rate_targets(0.2, 1.1, 0.01).unwrap();
        assert!((t.theta2 - 0.16).abs() < 1e-12);
        assert!((t.theta1 - 0.20).abs() < 1e-12);
        assert!((t.theta - 0.15).abs() < 1e-12);
        assert!((t.theta_alt - 0.16).abs() < 1e-12);
    }

    #[test]
    fn small_beta_limit() {
        let t = rate_targets(1e-9, 1.1, 0.01).unwrap();
        assert!((t.theta - 0.49).abs() < 1e-8);
    }

    #[test]
    fn inadmissible_beta_is_rejected() {
        let e = rate_targets(0.24, 1.1, 0.01).unwrap_err();
        assert!(matches!(e, Error::Inadmissible(_)));
        assert!(e.to_string().contains("1/(1+2/d+2*alpha)"));
    }

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 - 0.5 * v).collect();
        let f = fit_slope(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && f.ci_high < 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn too_few_seeds() {
        let mut cfg = ExperimentConfig::default();
        cfg.sweep.seeds = 3;
        assert!(matches!(cfg.validate(), Err(Error::InsufficientSeeds { needed: 4, got: 3 })));
    }
}
