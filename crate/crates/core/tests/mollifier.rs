mod common;

use proptest::prelude::*;
use stochvortex::fields::{GridField, GridGeometry};
use stochvortex::mollifier::{eval_v, eval_vn, MollifierSpec, C_BAR};
use stochvortex::Vec2;

#[test]
fn normalization_matches_radial_quadrature() {
    assert!((C_BAR / common::mollifier_normalizer() - 1.0).abs() < 1e-10);
}

#[test]
fn value_at_origin() {
    assert!((eval_v(Vec2::ZERO) - C_BAR * (-1.0f64).exp()).abs() < 1e-16);
    let one = MollifierSpec::new(0.2, 1.1, 1).unwrap();
    assert_eq!(eval_vn(&one, Vec2::ZERO), eval_v(Vec2::ZERO));
}

#[test]
fn peak_ratio_follows_the_scaling() {
    let spec = MollifierSpec::new(0.2, 1.1, 4096).unwrap();
    let ratio = eval_vn(&spec, Vec2::ZERO) / eval_v(Vec2::ZERO);
    assert!((ratio / 4096f64.powf(0.2) - 1.0).abs() < 1e-14);
}

#[test]
fn box_mass_of_v() {
    let g = GridGeometry::centered(40.0, 2048).unwrap();
    let f = GridField::from_fn(g, eval_v);
    assert!((f.mass() - 1.0).abs() < 1e-8, "{}", f.mass());
}

#[test]
fn scaled_mass_is_one() {
    let spec = MollifierSpec::new(0.2, 1.1, 1000).unwrap();
    let g = GridGeometry::centered(20.0, 1024).unwrap();
    let f = GridField::from_fn(g, |y| eval_vn(&spec, y));
    assert!((f.mass() - 1.0).abs() < 1e-8, "{}", f.mass());
}

proptest! {
    #[test]
    fn scaling_identity(n in 1usize..100_000, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let spec = MollifierSpec::new(0.2, 1.1, n).unwrap();
        let y = Vec2::new(a, b);
        let direct = (n as f64).powf(0.2) * eval_v(y * (n as f64).powf(0.1));
        prop_assert_eq!(eval_vn(&spec, y), direct);
    }

    #[test]
    fn v_is_radial(r in 0.0f64..30.0, t in 0.0f64..6.3) {
        let y = Vec2::new(r * t.cos(), r * t.sin());
        let v = eval_v(y);
        prop_assert!(v > 0.0);
        prop_assert!((v - eval_v(Vec2::new(r, 0.0))).abs() <= 1e-13 * v);
        prop_assert_eq!(v, eval_v(-y));
    }

    #[test]
    fn admissible_range_is_exact(beta in 0.0f64..0.5) {
        let ok = MollifierSpec::new(beta, 1.1, 100).is_ok();
        let expected = beta > 0.0 && beta < 1.0 / 3.0 && beta < 1.0 / 4.2;
        prop_assert_eq!(ok, expected);
    }
}
