use stochvortex::config::ExperimentConfig;
use stochvortex::harness::{build_limit_context, paired_run, rate_sweep, run_id, table_for};

fn short(t_end: f64, snapshots: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.pde.t_end = t_end;
    cfg.pde.snapshots = snapshots;
    cfg.diagnostics.kr_samples = 64;
    cfg
}

#[test]
fn single_particle_run_is_well_defined() {
    let cfg = short(0.05, 6);
    let ctx = build_limit_context(&cfg).unwrap();
    let table = table_for(&cfg, 1).unwrap();
    let run = paired_run(&cfg, &ctx, &table, 0).unwrap();
    assert_eq!(run.n, 1);
    assert!(run.trace.len() <= 6);
    assert!(run.exit.exited || run.trace.len() == 6);
    assert!(run.trace.entropy.iter().all(|h| h.is_finite() && *h >= 0.0));
}

#[test]
fn paired_runs_are_reproducible_and_respect_pinsker() {
    let cfg = short(0.1, 11);
    let ctx = build_limit_context(&cfg).unwrap();
    let table = table_for(&cfg, 500).unwrap();
    let a = paired_run(&cfg, &ctx, &table, run_id(0, 3)).unwrap();
    let b = paired_run(&cfg, &ctx, &table, run_id(0, 3)).unwrap();
    assert_eq!(a, b);
    assert!(a.violations.is_empty(), "{:?}", a.violations);
    assert!(a.sup_entropy().is_finite());
    for k in 0..a.trace.len() {
        assert!(a.trace.l1[k].powi(2) <= 2.0 * a.trace.entropy[k] + 1e-8);
    }
    let c = paired_run(&cfg, &ctx, &table, run_id(0, 4)).unwrap();
    assert_ne!(a.trace.entropy, c.trace.entropy);
}

#[test]
fn sweep_reports_every_n() {
    let mut cfg = short(0.02, 3);
    cfg.sweep.ns = vec![100, 200, 400];
    cfg.sweep.seeds = 4;
    cfg.output.workers = 4;
    let ctx = build_limit_context(&cfg).unwrap();
    let (report, runs) = rate_sweep(&cfg, &ctx).unwrap();
    assert_eq!(report.ns, vec![100, 200, 400]);
    assert_eq!(runs.len(), 12);
    assert_eq!(report.sup_h.len(), 3);
    assert!(report.exit_fractions.iter().all(|f| (0.0..=1.0).contains(f)));
}
