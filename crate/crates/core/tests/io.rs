use proptest::prelude::*;
use stochvortex::fields::{GridField, GridGeometry};
use stochvortex::infometrics::EntropyTrace;
use stochvortex::io::{
    decode_checkpoint, decode_scalar_field, decode_vector_field, encode_checkpoint, encode_scalar_field,
    encode_vector_field, parse_manifest, parse_trace, peek_field, read_manifest, write_manifest, write_trace,
    Checkpoint, ManifestEntry,
};
use stochvortex::particles::ParticleEnsemble;
use stochvortex::Vec2;

fn finite() -> impl Strategy<Value = f64> {
    -1e6f64..1e6
}

proptest! {
    #[test]
    fn scalar_fields_round_trip(m in 8usize..24, l in 0.5f64..50.0, cx in finite(), cy in finite(), seed in any::<u64>()) {
        let g = GridGeometry::new(Vec2::new(cx, cy), l, m).unwrap();
        let f = GridField::from_fn(g, |x| (x.x1 * 1.3 + x.x2).sin() + seed as f64 * 1e-20);
        let bytes = encode_scalar_field(&f);
        prop_assert_eq!(peek_field(&bytes).unwrap(), (g, 1));
        prop_assert_eq!(decode_scalar_field(&bytes).unwrap(), f.clone());
        prop_assert!(decode_vector_field(&bytes).is_err());
        let v = f.map(|a| Vec2::new(a, -a));
        prop_assert_eq!(decode_vector_field(&encode_vector_field(&v)).unwrap(), v);
    }

    #[test]
    fn checkpoints_round_trip(pts in prop::collection::vec((finite(), finite()), 1..64), step in any::<u64>(), dt in 1e-6f64..1.0, t in 0.0f64..10.0, o in (finite(), finite())) {
        let ensemble = ParticleEnsemble { rel: pts.iter().map(|&(a, b)| Vec2::new(a, b)).collect(), offset: Vec2::new(o.0, o.1), t };
        let cp = Checkpoint { step, dt, ensemble };
        let bytes = encode_checkpoint(&cp);
        prop_assert_eq!(decode_checkpoint(&bytes).unwrap(), cp);
        prop_assert!(decode_checkpoint(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn traces_round_trip(rows in prop::collection::vec(prop::array::uniform7(0.0f64..10.0), 0..20)) {
        let mut tr = EntropyTrace::default();
        for r in &rows {
            tr.times.push(r[0]);
            tr.entropy.push(r[1]);
            tr.fisher.push(r[2]);
            tr.l1.push(r[3]);
            tr.kr_lo.push(r[4]);
            tr.kr_hi.push(r[5]);
            tr.qv_cum.push(r[6]);
        }
        let mut buf = Vec::new();
        write_trace(&mut buf, &tr).unwrap();
        prop_assert!(buf.starts_with(b"t,H,I,l1,kr_lo,kr_hi,qv_cum"));
        prop_assert_eq!(parse_trace(&buf).unwrap(), tr);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256), magic in 0usize..2) {
        let mut b = bytes.clone();
        if magic == 1 && b.len() >= 6 {
            b[..4].copy_from_slice(b"SVFD");
            b[4..6].copy_from_slice(&1u16.to_le_bytes());
        }
        let _ = decode_scalar_field(&b);
        let _ = decode_vector_field(&b);
        let _ = decode_checkpoint(&b);
        let _ = parse_manifest(&b);
        let _ = parse_trace(&b);
    }
}

#[test]
fn manifest_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("manifest.csv");
    let entries: Vec<ManifestEntry> = (0..5)
        .map(|k| ManifestEntry { t: 0.01 * k as f64, file: format!("rho_tilde_{k:04}.bin"), x1: k as f64 * 0.1, x2: -0.2 })
        .collect();
    write_manifest(&p, &entries).unwrap();
    assert_eq!(read_manifest(&p).unwrap(), entries);
    assert!(parse_manifest(b"t,file,x1,x2\n0.1,a,0,0\n0.1,b,0,0\n").is_err());
}

#[test]
fn oversized_headers_are_rejected() {
    let g = GridGeometry::centered(1.0, 8).unwrap();
    let mut bytes = encode_scalar_field(&GridField::from_fn(g, |_| 1.0));
    bytes[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
    assert!(decode_scalar_field(&bytes).is_err());
}

#[test]
fn fuzz_seeds_decode_as_expected() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let read = |t: &str, f: &str| std::fs::read(root.join(t).join(f)).unwrap();
    assert_eq!(decode_scalar_field(&read("field_decode", "gaussian_m8")).unwrap().geom.points, 8);
    assert!(decode_vector_field(&read("field_decode", "vector_m8")).is_ok());
    assert!(decode_scalar_field(&read("field_decode", "truncated")).is_err());
    assert_eq!(decode_checkpoint(&read("checkpoint_decode", "three")).unwrap().ensemble.len(), 3);
    assert_eq!(decode_checkpoint(&read("checkpoint_decode", "one")).unwrap().step, 0);
    assert_eq!(parse_manifest(&read("manifest_parse", "three")).unwrap().len(), 3);
    assert!(parse_manifest(&read("manifest_parse", "unordered")).is_err());
    assert_eq!(parse_trace(&read("trace_csv_parse", "two_rows")).unwrap().len(), 2);
    assert!(parse_trace(&read("trace_csv_parse", "bad_header")).is_err());
    for f in ["minimal.toml", "default.toml", "acceptance.toml"] {
        let text = String::from_utf8(read("config_parse", f)).unwrap();
        stochvortex::config::ExperimentConfig::from_toml(&text).unwrap().validate().unwrap();
    }
}
