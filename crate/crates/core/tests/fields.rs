mod common;

use proptest::prelude::*;
use stochvortex::fields::{mollified_density_on, shift_field, GridField, GridGeometry, ShiftMethod};
use stochvortex::infometrics::relative_entropy;
use stochvortex::mollifier::{eval_vn, MollifierSpec};
use stochvortex::Vec2;

fn cloud(seed: u64, n: usize) -> Vec<Vec2> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect()
}

#[test]
fn single_particle_off_center() {
    let spec = MollifierSpec::new(0.2, 1.1, 300).unwrap();
    let g = GridGeometry::centered(6.0, 64).unwrap();
    let p = Vec2::new(0.37, -1.1);
    let f = mollified_density_on(&[p], &spec, &g).unwrap();
    for k in [0, 100, 2080, 4095] {
        let x = g.node(k / 64, k % 64);
        let v = eval_vn(&spec, x - p);
        assert!((f.values[k] - v).abs() <= 1e-12 * v || v < 1e-16 * spec.peak());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn density_is_linear_in_the_ensemble(seed in 0u64..10_000, n1 in 1usize..40, n2 in 1usize..40) {
        let spec = MollifierSpec::new(0.2, 1.1, 100).unwrap();
        let g = GridGeometry::centered(6.0, 48).unwrap();
        let a = cloud(seed, n1);
        let b = cloud(seed + 1, n2);
        let ab: Vec<Vec2> = a.iter().chain(&b).cloned().collect();
        let (fa, fb, fab) = (
            mollified_density_on(&a, &spec, &g).unwrap(),
            mollified_density_on(&b, &spec, &g).unwrap(),
            mollified_density_on(&ab, &spec, &g).unwrap(),
        );
        let (w1, w2) = (n1 as f64, n2 as f64);
        for k in 0..g.len() {
            let w = (w1 * fa.values[k] + w2 * fb.values[k]) / (w1 + w2);
            prop_assert!((fab.values[k] - w).abs() <= 1e-13 * fab.peak());
        }
        prop_assert!(fab.min() >= 0.0);
    }

    #[test]
    fn shifting_preserves_mass_and_entropy(a1 in -2.0f64..2.0, a2 in -2.0f64..2.0) {
        let g = GridGeometry::centered(8.0, 128).unwrap();
        let f = GridField::from_fn(g, |x| common::gaussian(x, Vec2::new(0.3, 0.1), 0.6));
        let h = GridField::from_fn(g, |x| 0.5 * common::gaussian(x, Vec2::ZERO, 0.8) + 0.5 * common::gaussian(x, Vec2::new(-0.4, 0.5), 0.5));
        let a = Vec2::new(a1, a2);
        let fs = shift_field(&f, a, ShiftMethod::Fourier).unwrap();
        let hs = shift_field(&h, a, ShiftMethod::Fourier).unwrap();
        prop_assert!((fs.mass() - f.mass()).abs() < 1e-6);
        let before = relative_entropy(&f, &h).unwrap();
        let after = relative_entropy(&fs.map(|v| v.max(0.0)), &hs.map(|v| v.max(1e-300))).unwrap();
        prop_assert!((before - after).abs() < 1e-6, "{before} {after}");
    }
}
