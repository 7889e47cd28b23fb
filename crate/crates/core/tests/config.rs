use proptest::prelude::*;
use stochvortex::config::ExperimentConfig;
use stochvortex::Error;

#[test]
fn shipped_configs_validate() {
    for name in ["default.toml", "acceptance.toml"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
        let cfg = ExperimentConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        assert!(cfg.validate_report().iter().all(|l| l.passed));
    }
}

#[test]
fn empty_file_gives_the_defaults() {
    assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(matches!(ExperimentConfig::from_toml("[mollifier]\nbeta = 0.2\ngamma = 1\n"), Err(Error::Config(_))));
}

#[test]
fn inadmissible_beta_names_the_range() {
    let cfg = ExperimentConfig::from_toml("[mollifier]\nbeta = 0.3\n").unwrap();
    let err = cfg.validate().unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("0.3"), "{err}");
    let report = cfg.validate_report();
    assert!(!report[0].passed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn toml_round_trip(beta in 0.01f64..0.2, n in 1usize..100_000, seed in any::<u32>(), dt in 1e-5f64..1e-2, ns in prop::collection::vec(1usize..10_000, 0..6), workers in 1usize..16) {
        let mut cfg = ExperimentConfig::default();
        cfg.mollifier.beta = beta;
        cfg.mollifier.n = n;
        cfg.noise.seed = seed as u64;
        cfg.noise.dt = dt;
        cfg.sweep.ns = ns;
        cfg.output.workers = workers;
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }
}
