//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion.
//!
//! Criteria can be selected by number: `cargo test --test acceptance -- 1 3`.
//! The process fails if any selected criterion fails, except those listed in
//! `UNATTAINABLE`, whose failure is reported but expected (see README).

mod common;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stochvortex::config::ExperimentConfig;
use stochvortex::fields::{GridField, GridGeometry, GradientMethod, ScalarField};
use stochvortex::harness::{
    build_limit_context, exit_sweep, paired_run_in, rate_sweep, table_for, Frame, PairedRun, RateReport,
};
use stochvortex::infometrics::{dv_check, fisher_information, l1_distance, qv_term, relative_entropy};
use stochvortex::kernels::{build_interaction_table, eval_k, table_dimensions};
use stochvortex::mollifier::MollifierSpec;
use stochvortex::particles::{common_record, DriftMethod, SigmaSchedule};
use stochvortex::pde::{check_decay_bounds, decay_thresholds, sample_shift_path, solve_vorticity, SolverOptions};
use stochvortex::{fields::density_and_qv_rate, Vec2};

/// Criteria that cannot hold for any admissible input.
const UNATTAINABLE: &[usize] = &[8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn acceptance_config() -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/acceptance.toml");
    let mut cfg = ExperimentConfig::load(&path).expect("acceptance config");
    cfg.output.workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    cfg
}

fn gaussian_field(geom: GridGeometry, mean: Vec2, variance: f64) -> ScalarField {
    GridField::from_fn(geom, |x| common::gaussian(x, mean, variance))
}

fn lamb_oseen() -> Outcome {
    let t0 = 0.1;
    let t_end = 0.5;
    // exp(-r²/(4t))/(4πt): per-coordinate variance 2t
    let heat = |x: Vec2, t: f64| (-x.norm_sq() / (4.0 * t)).exp() / (4.0 * PI * t);
    let geom = GridGeometry::centered(10.0, 256).unwrap();
    let rho0 = GridField::from_fn(geom, |x| heat(x, t0));
    let start = Instant::now();
    let sol = match solve_vorticity(&rho0, &[0.0, t_end], &SolverOptions::default()) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("solver error: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let last = &sol.snapshots.last().unwrap().field;
    let err = last
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| (v - heat(geom.node(k / 256, k % 256), t0 + t_end)).abs())
        .fold(0.0, f64::max);
    outcome(err < 1e-3 && secs < 60.0, format!("L-inf error {err:.3e} (< 1e-3), {secs:.1} s (< 60 s)"))
}

fn kernel_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut odd_fail = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        let a = rng.random_range(0.0..2.0 * PI);
        let x = Vec2::new(r * a.cos(), r * a.sin());
        let (k, km) = (eval_k(x).unwrap(), eval_k(-x).unwrap());
        if km != -k {
            odd_fail += 1;
        }
        worst = worst.max((k.norm() * 2.0 * PI * x.norm() - 1.0).abs());
    }
    let spec = MollifierSpec::new(0.2, 1.1, 1000).unwrap();
    let (l, m) = table_dimensions(&spec, 12.0, 8.0);
    let table = build_interaction_table(&spec, l, m).unwrap();
    let g = table.field.geom;
    let origin = table.field.get(m / 2, m / 2);
    let origin_ok = origin == Vec2::ZERO && table.interpolate(Vec2::ZERO).unwrap() == Vec2::ZERO;
    let near = 3.0 * spec.bandwidth();
    let mut rel: f64 = 0.0;
    let mut count = 0;
    while count < 100 {
        let (i, j) = (rng.random_range(1..m), rng.random_range(1..m));
        let z = g.local(i, j);
        if z.norm() < near || z.max_abs() > l - g.spacing() {
            continue;
        }
        let exact = common::mollified_kernel(0.2, 1000, z);
        rel = rel.max((table.field.get(i, j) - exact).norm() / exact.norm());
        count += 1;
    }
    let pass = odd_fail == 0 && worst <= 8.0 * f64::EPSILON && origin_ok && rel < 1e-4;
    outcome(
        pass,
        format!(
            "oddness failures {odd_fail}, magnitude law {worst:.2e}, origin {:?}, far field {rel:.2e} (< 1e-4)",
            (origin.x1, origin.x2)
        ),
    )
}

fn random_mixture(rng: &mut ChaCha8Rng, geom: GridGeometry) -> ScalarField {
    let parts = rng.random_range(1..=3);
    let comps: Vec<(f64, Vec2, f64)> = (0..parts)
        .map(|_| {
            let w = rng.random_range(0.2..1.0);
            let m = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (w, m, rng.random_range(0.5..1.5))
        })
        .collect();
    let total: f64 = comps.iter().map(|c| c.0).sum();
    GridField::from_fn(geom, |x| comps.iter().map(|&(w, m, v)| w * common::gaussian(x, m, v)).sum::<f64>() / total)
        .normalized()
        .unwrap()
}

fn information_oracles() -> Outcome {
    let geom = GridGeometry::centered(8.0, 256).unwrap();
    let (m1, m2, var) = (Vec2::new(0.3, -0.2), Vec2::new(-0.1, 0.25), 0.5);
    let f = gaussian_field(geom, m1, var);
    let g = gaussian_field(geom, m2, var);
    let d2 = (m1 - m2).norm_sq();
    let kl = relative_entropy(&f, &g).unwrap();
    let fi = fisher_information(&f, &g, GradientMethod::CentralDifference).unwrap();
    let kl_err = (kl - d2 / (2.0 * var)).abs();
    let fi_err = (fi - d2 / (var * var)).abs();

    let tol = 1e-8;
    let small = GridGeometry::centered(4.0, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut gibbs, mut ckp, mut dv) = (0, 0, 0);
    for _ in 0..100 {
        let f = random_mixture(&mut rng, small);
        let g = random_mixture(&mut rng, small);
        let h = relative_entropy(&f, &g).unwrap();
        if h < -tol {
            gibbs += 1;
        }
        let l1 = l1_distance(&f, &g).unwrap();
        if l1 * l1 > 2.0 * h + tol {
            ckp += 1;
        }
        let (a, b, c) = (rng.random_range(-3.0..3.0), rng.random_range(0.2..2.0), rng.random_range(0.0..PI));
        let phi = GridField::from_fn(small, |x| a * (b * x.x1 + c).sin() + 0.3 * x.x2);
        let eta = rng.random_range(0.3..3.0);
        let r = dv_check(&f, &g, &phi, eta).unwrap();
        if !r.holds(tol) {
            dv += 1;
        }
    }
    let pass = kl_err < 1e-4 && fi_err < 1e-3 && gibbs + ckp + dv == 0;
    outcome(
        pass,
        format!(
            "KL error {kl_err:.2e} (< 1e-4), Fisher error {fi_err:.2e} (< 1e-3), violations Gibbs {gibbs} CKP {ckp} DV {dv}"
        ),
    )
}

fn common_noise() -> Outcome {
    let mut cfg = acceptance_config();
    cfg.mollifier.n = 2000;
    let ctx = build_limit_context(&cfg).unwrap();
    let table = table_for(&cfg, 2000).unwrap();
    let mut runs: Vec<PairedRun> = Vec::new();
    for sigma in [SigmaSchedule::zero(), SigmaSchedule::identity()] {
        cfg.noise.sigma = sigma;
        runs.push(paired_run_in(&cfg, &ctx, &table, 0, Frame::Lab).unwrap());
    }
    let (a, b) = (&runs[0].trace, &runs[1].trace);
    let common = a.len().min(b.len());
    let mut worst: f64 = 0.0;
    for k in 0..common {
        for (x, y) in a.row(k).iter().zip(b.row(k)) {
            worst = worst.max((x - y).abs());
        }
    }
    let moved = runs[1].shift_path.points.last().unwrap().norm();
    let pass = common > 0 && a.len() == b.len() && worst <= 1e-5;
    outcome(
        pass,
        format!(
            "{common} snapshots (lengths {} / {}), max difference {worst:.2e} (<= 1e-5), |X_T| = {moved:.3}",
            a.len(),
            b.len()
        ),
    )
}

fn convergence_trend(report: &RateReport) -> Outcome {
    let s = report.slope.as_ref();
    let meds: Vec<String> = report.sup_h.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        report.decreasing() && report.slope_negative_95(),
        format!(
            "median sup H [{}], floor {:.2e}, slope {:.3} with 95% CI [{:.3}, {:.3}], target exponent {:.2} (alt {:.2}), invariant violations {}",
            meds.join(", "),
            report.h_floor,
            s.map_or(f64::NAN, |s| s.slope),
            s.map_or(f64::NAN, |s| s.ci_low),
            s.map_or(f64::NAN, |s| s.ci_high),
            report.targets.theta,
            report.targets.theta_alt,
            report.violations.len()
        ),
    )
}

fn qv_scaling(report: &RateReport) -> Outcome {
    let beta = 0.2;
    // ∫|∇V|²/V for the normalized profile, by radial quadrature
    let c = common::mollifier_normalizer();
    let j = common::simpson(
        |r: f64| 2.0 * PI * c * r * r * r / (1.0 + r * r) * (-(1.0 + r * r).sqrt()).exp(),
        0.0,
        60.0,
        200_000,
    );
    let t_end = 0.25;
    let times = [0.0, t_end];
    let mut worst: f64 = 0.0;
    let mut base = None;
    for &n in &[250usize, 1000, 4000] {
        let spec = MollifierSpec::new(beta, 1.1, n).unwrap();
        let h = spec.bandwidth() / 16.0;
        let m = ((12.0 / h) as usize) | 1;
        let geom = GridGeometry::centered(m as f64 * h / 2.0, m).unwrap();
        let (_, rate) = density_and_qv_rate(&[Vec2::ZERO], &spec, &geom).unwrap();
        let qv = qv_term(&times, &[rate, rate], None).unwrap();
        let analytic = 0.5 * (n as f64).powf(beta) * j * t_end;
        worst = worst.max((qv / analytic - 1.0).abs());
        let (n0, q0) = *base.get_or_insert((n, qv));
        let ratio = qv / q0 / (n as f64 / n0 as f64).powf(beta);
        worst = worst.max((ratio - 1.0).abs());
    }
    let bound = beta * (1.0 + 1.0 + 2.0 * 1.1) - 1.0 + 0.2;
    let slope = report.qv_slope.as_ref().map_or(f64::NAN, |s| s.slope);
    outcome(
        worst < 0.01 && slope <= bound,
        format!("single-particle relative error {worst:.2e} (< 1e-2), sweep slope {slope:.3} (<= {bound:.2})"),
    )
}

fn exit_statistics() -> Outcome {
    let mut cfg = acceptance_config();
    // exit-only runs use the particle-mesh drift on a coarser table
    cfg.grid.table_cells_per_bandwidth = 4.0;
    let ctx = build_limit_context(&cfg).unwrap();
    let stats = exit_sweep(&cfg, &ctx, 64, DriftMethod::Mesh).unwrap();
    let fr: Vec<String> = stats.ns.iter().zip(&stats.fractions).map(|(n, f)| format!("{n}: {f:.3}")).collect();
    outcome(stats.non_increasing(), format!("P(tau < T) over 64 seeds [{}]", fr.join(", ")))
}

fn decay_bound() -> Outcome {
    let cfg = acceptance_config();
    let c_tilde3 = cfg.decay.c_tilde3;
    let (c3, t1) = decay_thresholds(c_tilde3, cfg.decay.heat_constant);
    // No probability density satisfies ρ₀ ≤ C̃₃ exp(-|x|²/C̃₃) with C̃₃ < 1/(2π)
    // (its mass is at most πC̃₃²). The closest admissible datum is the
    // mass-one Gaussian touching the bound at t = 0.
    let geom = GridGeometry::centered(8.0, 256).unwrap();
    let rho0 = gaussian_field(geom, Vec2::ZERO, 1.0 / (4.0 * PI));
    let times: Vec<f64> = (0..=8).map(|k| t1 * k as f64 / 8.0).collect();
    let opts = SolverOptions { dt: t1 / 64.0, ..Default::default() };
    let mut sol = solve_vorticity(&rho0, &times, &opts).unwrap();
    let steps = 64;
    let record = common_record(cfg.noise.seed, 0, t1 / steps as f64, steps);
    sol.shift_path = Some(sample_shift_path(&record, &cfg.noise.sigma, t1, t1 / steps as f64).unwrap());
    let report = check_decay_bounds(&sol, cfg.decay.c1, cfg.decay.c2, t1, cfg.decay.window);
    outcome(
        report.gaussian_holds(),
        format!(
            "C~3 = {c_tilde3}, C3 = {c3:.4}, T1 = {t1:.4}: max rho / bound {:.3e} where rho > {:.0e}, {:.3e} on the full grid; failing snapshots {} of {} (first at t = {:.4})",
            report.gaussian_ratio_window,
            cfg.decay.window,
            report.gaussian_ratio,
            report.gaussian_failures.len(),
            times.len(),
            report.gaussian_failures.first().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wants = |k: usize| selected.is_empty() || selected.contains(&k);
    let mut unexpected = Vec::new();
    let mut sweep: Option<RateReport> = None;
    let sweep_report = |sweep: &mut Option<RateReport>| -> RateReport {
        if sweep.is_none() {
            let cfg = acceptance_config();
            let ctx = build_limit_context(&cfg).unwrap();
            *sweep = Some(rate_sweep(&cfg, &ctx).unwrap().0);
        }
        sweep.clone().unwrap()
    };
    let names = [
        "Lamb-Oseen oracle",
        "kernel identities",
        "information-functional oracles",
        "common-noise cancellation",
        "convergence trend",
        "quadratic-variation scaling",
        "exit statistics",
        "decay bound",
    ];
    for (idx, name) in names.iter().enumerate() {
        let k = idx + 1;
        if !wants(k) {
            continue;
        }
        let start = Instant::now();
        let o = match k {
            1 => lamb_oseen(),
            2 => kernel_identities(),
            3 => information_oracles(),
            4 => common_noise(),
            5 => convergence_trend(&sweep_report(&mut sweep)),
            6 => qv_scaling(&sweep_report(&mut sweep)),
            7 => exit_statistics(),
            _ => decay_bound(),
        };
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && UNATTAINABLE.contains(&k) { " [expected: unattainable]" } else { "" };
        println!("{tag} criterion {k} ({name}){note}: {} [{:.1} s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass && !UNATTAINABLE.contains(&k) {
            unexpected.push(k);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("failed criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
