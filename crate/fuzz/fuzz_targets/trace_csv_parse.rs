#![no_main]
use libfuzzer_sys::fuzz_target;
use stochvortex::io::{parse_trace, write_trace};

fuzz_target!(|data: &[u8]| {
    if let Ok(trace) = parse_trace(data) {
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let again = parse_trace(&buf).unwrap();
        assert_eq!(again.len(), trace.len());
    }
});
