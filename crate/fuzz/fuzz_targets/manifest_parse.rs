#![no_main]
use libfuzzer_sys::fuzz_target;
use stochvortex::io::parse_manifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(entries) = parse_manifest(data) {
        assert!(entries.windows(2).all(|w| w[0].t < w[1].t));
    }
});
