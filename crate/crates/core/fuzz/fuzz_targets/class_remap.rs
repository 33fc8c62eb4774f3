#![no_main]

use hdseg::data::ClassRemap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(remap) = ClassRemap::parse(text) {
            let _ = remap.num_classes();
        }
    }
});
