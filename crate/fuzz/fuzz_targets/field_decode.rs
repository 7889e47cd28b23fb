#![no_main]
use libfuzzer_sys::fuzz_target;
use stochvortex::io::{decode_scalar_field, decode_vector_field, encode_scalar_field, peek_field};

fuzz_target!(|data: &[u8]| {
    let _ = peek_field(data);
    if let Ok(f) = decode_scalar_field(data) {
        // accepted inputs re-encode to the same bytes
        assert_eq!(encode_scalar_field(&f), data);
    }
    let _ = decode_vector_field(data);
});
