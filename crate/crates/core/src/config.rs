//! Experiment configuration: one TOML file, every field defaulted.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::fields::{GradientMethod, GridGeometry};
use crate::harness::rate_targets;
use crate::kernels::eval_k0;
use crate::mollifier::{check_assumption_av, check_beta_alpha, MollifierSpec};
use crate::particles::{DriftMethod, SigmaSchedule};
use crate::pde::SolverOptions;
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierSection {
    pub beta: f64,
    pub alpha: f64,
    /// Particle count for single runs.
    pub n: usize,
}

impl Default for MollifierSection {
    fn default() -> Self {
        Self { beta: 0.2, alpha: 1.1, n: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSection {
    Gaussian { mean: [f64; 2], variance: f64 },
    /// Density stored in the binary field format.
    Grid { path: String },
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection::Gaussian { mean: [0.0, 0.0], variance: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub seed: u64,
    pub dt: f64,
    pub sigma: SigmaSchedule,
    pub drift: DriftMethod,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { seed: 2024, dt: 1e-3, sigma: SigmaSchedule::identity(), drift: DriftMethod::Direct }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Half-width of the PDE grid.
    pub half_width: f64,
    pub points: usize,
    /// Minimum PDE grid cells per mollifier bandwidth.
    pub cells_per_bandwidth: f64,
    /// Kernel-table cells per bandwidth.
    pub table_cells_per_bandwidth: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { half_width: 8.0, points: 256, cells_per_bandwidth: 6.0, table_cells_per_bandwidth: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSection {
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub cfl: f64,
    pub boundary_tolerance: f64,
    pub negativity_floor: f64,
}

impl Default for PdeSection {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 0.25, snapshots: 32, cfl: 0.5, boundary_tolerance: 1e-8, negativity_floor: -1e-6 }
    }
}

impl PdeSection {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            dt: self.dt,
            cfl: self.cfl,
            negativity_floor: self.negativity_floor,
            boundary_tolerance: self.boundary_tolerance,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Entropy window: nodes where the initial limit density exceeds this
    /// fraction of its peak.
    pub window_floor: f64,
    pub kr_samples: usize,
    pub kr_repeats: usize,
    pub gradient: GradientMethod,
    /// Half-width of the grid used for the quadratic-variation quadrature.
    pub qv_half_width: f64,
    pub qv: bool,
    pub invariant_tolerance: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            window_floor: 1e-10,
            kr_samples: 256,
            kr_repeats: 1,
            gradient: GradientMethod::CentralDifference,
            qv_half_width: 6.0,
            qv: true,
            invariant_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub ns: Vec<usize>,
    pub seeds: usize,
    pub delta: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { ns: vec![250, 500, 1000, 2000, 4000], seeds: 8, delta: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySection {
    pub c1: f64,
    pub c2: f64,
    pub c_tilde3: f64,
    /// Heat-kernel constant entering the `C₃` threshold.
    pub heat_constant: f64,
    pub window: f64,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self { c1: 20.0, c2: 10.0, c_tilde3: 0.1, heat_constant: 1.0, window: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub workers: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into(), workers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mollifier: MollifierSection,
    pub initial: InitialSection,
    pub noise: NoiseSection,
    pub grid: GridSection,
    pub pde: PdeSection,
    pub diagnostics: DiagnosticsSection,
    pub sweep: SweepSection,
    pub decay: DecaySection,
    pub output: OutputSection,
}

/// One line per check run by [`ExperimentConfig::validate_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn spec(&self) -> Result<MollifierSpec> {
        MollifierSpec::new(self.mollifier.beta, self.mollifier.alpha, self.mollifier.n)
    }

    pub fn pde_geometry(&self) -> Result<GridGeometry> {
        GridGeometry::centered(self.grid.half_width, self.grid.points)
    }

    /// Steps of the particle scheme up to `t_end`.
    pub fn sde_steps(&self) -> usize {
        (self.pde.t_end / self.noise.dt).round() as usize
    }

    /// Runs every check; the first failure is returned as the error.
    pub fn validate(&self) -> Result<()> {
        match self.checks().into_iter().find_map(|(_, e)| e) {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn validate_report(&self) -> Vec<CheckLine> {
        self.checks().into_iter().map(|(l, _)| l).collect()
    }

    fn checks(&self) -> Vec<(CheckLine, Option<Error>)> {
        let mut out = Vec::new();
        let mut push = |name: &str, r: Result<String>| {
            let (passed, detail, err) = match r {
                Ok(d) => (true, d, None),
                Err(e) => (false, e.to_string(), Some(e)),
            };
            out.push((CheckLine { name: name.into(), passed, detail }, err));
        };
        push("beta-admissibility", {
            check_beta_alpha(self.mollifier.beta, self.mollifier.alpha).map(|_| {
                format!("beta = {} alpha = {}", self.mollifier.beta, self.mollifier.alpha)
            })
        });
        push("rate-targets", rate_targets(self.mollifier.beta, self.mollifier.alpha, self.sweep.delta).map(|t| format!("theta = {:.4}", t.theta)));
        push("mollifier-av", self.spec().and_then(|s| {
            let r = check_assumption_av(&s);
            if r.passed() {
                Ok(format!("gradient constant {:.6}, decay constant {:.6}", r.gradient_constant, r.decay_constant))
            } else {
                Err(Error::Assumption(r.violations.join("; ")))
            }
        }));
        push("kernel-k0-bound", k0_bound().and_then(|b| {
            if b <= 0.25 {
                Ok(format!("max |K0| = {b:.6} <= 1/4"))
            } else {
                Err(Error::Assumption(format!("max |K0| = {b} exceeds 1/4")))
            }
        }));
        push("sigma", self.noise.sigma.validate().map(|_| format!("sup norm {:.4}", self.noise.sigma.sup_norm())));
        push("time-steps", self.check_times());
        push("grid", self.pde_geometry().and_then(|g| self.check_resolution(&g)));
        push("initial-density", self.check_initial());
        push("diagnostics", self.check_diagnostics());
        push("sweep", self.check_sweep());
        out
    }

    fn check_times(&self) -> Result<String> {
        let n = &self.noise;
        if !(n.dt > 0.0 && self.pde.dt > 0.0 && self.pde.t_end > 0.0) {
            return Err(Error::Config("time steps and t_end must be positive".into()));
        }
        let steps = self.pde.t_end / n.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Config(format!("t_end = {} is not a multiple of dt = {}", self.pde.t_end, n.dt)));
        }
        if self.pde.snapshots < 2 {
            return Err(Error::Config("at least two snapshots are required".into()));
        }
        if !(self.pde.cfl > 0.0) {
            return Err(Error::Config("CFL number must be positive".into()));
        }
        Ok(format!("{} particle steps, {} snapshots", steps.round(), self.pde.snapshots))
    }

    /// Largest particle count covered by this config.
    pub fn max_n(&self) -> usize {
        self.sweep.ns.iter().cloned().chain([self.mollifier.n]).max().unwrap_or(1)
    }

    fn check_resolution(&self, g: &GridGeometry) -> Result<String> {
        let spec = MollifierSpec::new(self.mollifier.beta, self.mollifier.alpha, self.max_n())?;
        g.check_resolution(&spec, self.grid.cells_per_bandwidth)?;
        Ok(format!("h = {:.5} resolves N = {}", g.spacing(), spec.n))
    }

    fn check_initial(&self) -> Result<String> {
        match &self.initial {
            InitialSection::Gaussian { mean, variance } => {
                if *variance <= 0.0 {
                    return Err(Error::PointMass);
                }
                let m = Vec2::new(mean[0], mean[1]);
                let inner = self.grid.half_width * (1.0 - SolverOptions::default().boundary_band);
                let sd = variance.sqrt();
                let tail = |c: f64| 0.5 * erfc((inner - c) / (sd * std::f64::consts::SQRT_2)) + 0.5 * erfc((inner + c) / (sd * std::f64::consts::SQRT_2));
                let outside = 1.0 - (1.0 - tail(m.x1)) * (1.0 - tail(m.x2));
                if !m.is_finite() || outside > self.pde.boundary_tolerance {
                    return Err(Error::Config(format!(
                        "initial Gaussian puts mass {outside:e} near or outside the box of half-width {}",
                        self.grid.half_width
                    )));
                }
                Ok(format!("Gaussian, mass near the boundary {outside:e}"))
            }
            InitialSection::Grid { path } => {
                if path.is_empty() {
                    return Err(Error::Config("grid initial density needs a path".into()));
                }
                Ok(format!("grid density from {path}"))
            }
        }
    }

    fn check_diagnostics(&self) -> Result<String> {
        let d = &self.diagnostics;
        if d.kr_samples == 0 || d.kr_samples > crate::infometrics::kr::MAX_SAMPLES || d.kr_repeats == 0 {
            return Err(Error::SampleSize(format!("kr_samples = {}, kr_repeats = {}", d.kr_samples, d.kr_repeats)));
        }
        if !(d.window_floor > 0.0 && d.window_floor < 1.0) {
            return Err(Error::Config(format!("window_floor = {} must lie in (0, 1)", d.window_floor)));
        }
        if !(d.qv_half_width > 0.0) {
            return Err(Error::Config("qv_half_width must be positive".into()));
        }
        Ok(format!("window floor {:e}, {} KR samples", d.window_floor, d.kr_samples))
    }

    fn check_sweep(&self) -> Result<String> {
        let s = &self.sweep;
        if s.ns.is_empty() || s.ns.windows(2).any(|w| w[1] <= w[0]) || s.ns[0] == 0 {
            return Err(Error::Config("sweep Ns must be positive and strictly increasing".into()));
        }
        if s.seeds < crate::harness::MIN_SEEDS {
            return Err(Error::InsufficientSeeds { needed: crate::harness::MIN_SEEDS, got: s.seeds });
        }
        Ok(format!("{} values of N, {} seeds", s.ns.len(), s.seeds))
    }
}

/// Largest `|K₀|` entry over a deterministic sample of the plane.
fn k0_bound() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in -50i32..=50 {
        for b in -50..=50 {
            if b == 0 {
                continue;
            }
            let x = Vec2::new(a as f64 * 0.37, b as f64 * 1e-3 * (1 + a.abs()) as f64);
            worst = worst.max(eval_k0(x)?.rows[0][0].abs());
        }
    }
    Ok(worst)
}
