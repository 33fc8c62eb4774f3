#![no_main]

use hdseg::data::FeatureFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = FeatureFile::from_bytes(data) {
        assert_eq!(file.to_bytes(), data);
    }
});
