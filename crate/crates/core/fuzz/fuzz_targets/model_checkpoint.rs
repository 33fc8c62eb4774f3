#![no_main]

use hdseg::ClassModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = ClassModel::from_bytes(data) {
        assert_eq!(model.to_bytes(), data);
    }
});
