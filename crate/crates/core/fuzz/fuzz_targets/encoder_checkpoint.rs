#![no_main]

use hdseg::EncoderParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(params) = EncoderParams::from_bytes(data) {
        assert_eq!(params.to_bytes(), data);
    }
});
