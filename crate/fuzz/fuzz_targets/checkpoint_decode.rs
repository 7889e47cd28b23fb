#![no_main]
use libfuzzer_sys::fuzz_target;
use stochvortex::io::{decode_checkpoint, encode_checkpoint};

fuzz_target!(|data: &[u8]| {
    if let Ok(cp) = decode_checkpoint(data) {
        assert_eq!(decode_checkpoint(&encode_checkpoint(&cp)).unwrap(), cp);
    }
});
