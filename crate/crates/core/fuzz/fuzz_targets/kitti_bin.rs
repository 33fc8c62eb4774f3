#![no_main]

use hdseg::data::kitti::{parse_kitti_bin, serialize_kitti_bin};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(scan) = parse_kitti_bin(data) {
        assert_eq!(serialize_kitti_bin(&scan), data);
    }
});
