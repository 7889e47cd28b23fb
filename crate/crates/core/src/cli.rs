//! Command-line front end. Every subcommand reads one TOML experiment file,
//! writes its outputs plus a copy of the resolved config into `--out`, and
//! maps library errors to exit codes (see [`Error::exit_code`]).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::harness::{build_limit_context, paired_run, rate_sweep, table_for};
use crate::io::{write_checkpoint, write_manifest, write_scalar_field, write_slice, write_trace_file, Checkpoint, ManifestEntry};
use crate::kernels::{build_interaction_table, eval_k, eval_k0, table_dimensions, TorusCorrection};
use crate::mollifier::MollifierSpec;
use crate::particles::{
    common_record, exit_radius, has_exited, sample_initial, stream_rng, ExitRecord, NoiseConfig, ParticleRun,
    StreamPurpose,
};
use crate::pde::{sample_shift_path, solve_vorticity};
use crate::{Error, Result, Vec2};

#[derive(Debug, Parser)]
#[command(name = "stochvortex", version, about = "Stochastic vortex particles and their mean-field limit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Experiment file (TOML). Built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `noise.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `output.workers`.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check admissibility, assumptions and grid rules.
    Validate(Common),
    /// Solve the limit equation; writes snapshots, slices and a manifest.
    SolvePde(Common),
    /// Run the particle system for `mollifier.n` particles.
    Simulate(Common),
    /// One paired particle/limit run with the entropy trace.
    Entropy(Common),
    /// Paired runs over `sweep.ns` and the rate fit.
    RateSweep(Common),
    /// Quick numerical checks of the kernels and the interaction table.
    KernelsSelftest,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.noise.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.output.workers = w;
        }
        let out = self.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
        Ok((cfg, out))
    }
}

fn prepare_out(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.toml"), cfg.to_toml()?)?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate(c) => validate(&c),
        Command::SolvePde(c) => solve_pde(&c),
        Command::Simulate(c) => simulate(&c),
        Command::Entropy(c) => entropy(&c),
        Command::RateSweep(c) => sweep(&c),
        Command::KernelsSelftest => selftest(),
    }
}

fn validate(c: &Common) -> Result<()> {
    let (cfg, _) = c.load()?;
    for line in cfg.validate_report() {
        println!("{} {}: {}", if line.passed { "ok  " } else { "FAIL" }, line.name, line.detail);
    }
    cfg.validate()
}

fn solve_pde(c: &Common) -> Result<()> {
    let (cfg, out) = c.load()?;
    cfg.validate()?;
    prepare_out(&cfg, &out)?;
    let (_, rho0) = crate::harness::initial_field(&cfg)?;
    let steps = crate::pde::snapshot_steps(cfg.sde_steps(), cfg.pde.snapshots);
    let times: Vec<f64> = steps.iter().map(|&s| s as f64 * cfg.noise.dt).collect();
    let mut sol = solve_vorticity(&rho0, &times, &cfg.pde.solver_options())?;
    let record = common_record(cfg.noise.seed, 0, cfg.noise.dt, cfg.sde_steps());
    let path = sample_shift_path(&record, &cfg.noise.sigma, cfg.pde.t_end, cfg.noise.dt)?;
    let mut entries = Vec::new();
    for (k, snap) in sol.snapshots.iter().enumerate() {
        let name = format!("rho_tilde_{k:04}.bin");
        write_scalar_field(&out.join(&name), &snap.field)?;
        write_slice(&out.join(format!("slice_{k:04}.csv")), &snap.field)?;
        let x = path.at_step(steps[k]);
        entries.push(ManifestEntry { t: snap.t, file: name, x1: x.x1, x2: x.x2 });
    }
    write_manifest(&out.join("manifest.csv"), &entries)?;
    sol.shift_path = Some(path);
    println!(
        "{} snapshots, {} steps, max Courant {:.3}, min value {:.3e}",
        sol.snapshots.len(),
        sol.steps,
        sol.max_courant,
        sol.min_value
    );
    Ok(())
}

fn simulate(c: &Common) -> Result<()> {
    let (cfg, out) = c.load()?;
    cfg.validate()?;
    prepare_out(&cfg, &out)?;
    let n = cfg.mollifier.n;
    let table = table_for(&cfg, n)?;
    let (initial, _) = crate::harness::initial_field(&cfg)?;
    let mut rng = stream_rng(cfg.noise.seed, 0, StreamPurpose::Initial);
    let ens = sample_initial(n, &initial, &mut rng)?;
    let noise = NoiseConfig { seed: cfg.noise.seed, run: 0, dt: cfg.noise.dt, sigma: cfg.noise.sigma.clone() };
    let mut sim = ParticleRun::new(ens, Some(&table), noise, cfg.noise.drift)?;
    let radius = exit_radius(cfg.mollifier.beta, n);
    let total = cfg.sde_steps();
    let mut exit = ExitRecord { tau: cfg.pde.t_end, radius, exited: false };
    while sim.steps < total {
        if has_exited(&sim.ensemble, radius) {
            exit = ExitRecord { tau: sim.ensemble.t, radius, exited: true };
            break;
        }
        match sim.advance() {
            Ok(()) => {}
            Err(Error::OutOfBox { .. }) => {
                exit = ExitRecord { tau: sim.ensemble.t, radius, exited: true };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let cp = Checkpoint { step: sim.steps as u64, dt: cfg.noise.dt, ensemble: sim.ensemble.clone() };
    write_checkpoint(&out.join("particles.bin"), &cp)?;
    fs::write(out.join("exit.json"), serde_json::to_string_pretty(&exit).map_err(|e| Error::Config(e.to_string()))?)?;
    println!("N = {n}, steps = {}, exited = {}, tau = {}", sim.steps, exit.exited, exit.tau);
    if exit.exited {
        return Err(Error::StoppedRun(exit.tau));
    }
    Ok(())
}

fn entropy(c: &Common) -> Result<()> {
    let (cfg, out) = c.load()?;
    prepare_out(&cfg, &out)?;
    let ctx = build_limit_context(&cfg)?;
    let table = table_for(&cfg, cfg.mollifier.n)?;
    let run = paired_run(&cfg, &ctx, &table, 0)?;
    write_trace_file(&out.join("trace.csv"), &run.trace)?;
    println!(
        "N = {}, sup H = {:.4e}, H floor = {:.3e}, exited = {}",
        run.n,
        run.sup_entropy(),
        ctx.h_floor,
        run.exit.exited
    );
    for v in &run.violations {
        eprintln!("violation: {v}");
    }
    Ok(())
}

fn sweep(c: &Common) -> Result<()> {
    let (cfg, out) = c.load()?;
    prepare_out(&cfg, &out)?;
    let ctx = build_limit_context(&cfg)?;
    let (report, runs) = rate_sweep(&cfg, &ctx)?;
    report.write_csv(&out.join("rate.csv"))?;
    report.write_json(&out.join("rate.json"))?;
    for r in &runs {
        write_trace_file(&out.join(format!("trace_n{}_r{:x}.csv", r.n, r.run)), &r.trace)?;
    }
    for (k, n) in report.ns.iter().enumerate() {
        println!("N = {n:6}  median sup H = {:.4e}  exit fraction = {:.3}", report.sup_h[k], report.exit_fractions[k]);
    }
    match &report.slope {
        Some(s) => println!(
            "slope {:.4} [{:.4}, {:.4}], target -{:.4}",
            s.slope, s.ci_low, s.ci_high, report.targets.theta
        ),
        None => println!("slope not available"),
    }
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    Ok(())
}

fn selftest() -> Result<()> {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            failures.push(name.to_string());
        }
    };
    let k = eval_k(Vec2::new(1.0, 0.0))?;
    check("K(1,0)", (k.x2 - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15 && k.x1 == 0.0, format!("{k:?}"));
    let k0 = eval_k0(Vec2::new(1.0, 1.0))?;
    check("K0(1,1)", (k0.rows[0][0] - 0.125).abs() < 1e-15, format!("{}", k0.rows[0][0]));
    let g4 = TorusCorrection::new(0.5).lattice_sums[0].1;
    let exact = 3.625_609_908_221_908f64.powi(8) / (960.0 * std::f64::consts::PI.powi(2));
    check("G4", (g4 - exact).abs() < 1e-12, format!("{g4:.12}"));
    let spec = MollifierSpec::new(0.2, 1.1, 1000)?;
    let (l, m) = table_dimensions(&spec, 12.0, 8.0);
    let table = build_interaction_table(&spec, l, m)?;
    let res = table.divergence_residual();
    check("table divergence", res < 1e-12, format!("{res:.3e}"));
    let z = Vec2::new(4.0, 3.0);
    let (a, b) = (table.interpolate(z)?, eval_k(z)?);
    let rel = (a - b).norm() / b.norm();
    check("far field", rel < 1e-2, format!("relative error {rel:.3e}"));
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Assumption(format!("self-test failures: {}", failures.join(", "))))
    }
}
