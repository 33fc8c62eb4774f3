#![no_main]

use hdseg::data::kitti::{parse_kitti_label, parse_label_words, serialize_label_words, Point, PointCloudScan};
use hdseg::data::ClassRemap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(words) = parse_label_words(data) {
        assert_eq!(serialize_label_words(&words), data);
    }
    // first byte picks the scan length so both matching and mismatched sizes are hit
    let Some((&n, rest)) = data.split_first() else { return };
    let scan = PointCloudScan {
        points: vec![Point { x: 0.0, y: 0.0, z: 0.0, intensity: 0.0 }; n as usize],
        labels: None,
    };
    if let Ok(scan) = parse_kitti_label(rest, scan, &ClassRemap::identity(20)) {
        assert_eq!(scan.labels.map(|l| l.len()), Some(n as usize));
    }
});
