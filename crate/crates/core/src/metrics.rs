//! Segmentation quality and throughput measurement.

use crate::{Error, Result};

/// `counts[g * n + p]` = points with ground truth `g` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
}

/// Per-class IoU (`None` where a class never occurs in truth or prediction)
/// and their mean over defined classes.
#[derive(Debug, Clone, PartialEq)]
pub struct IouSummary {
    pub per_class: Vec<Option<f64>>,
    pub miou: f64,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix {
            num_classes,
            counts: vec![0; num_classes * num_classes],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn accumulate(&mut self, gt: usize, pred: usize) -> Result<()> {
        if gt >= self.num_classes || pred >= self.num_classes {
            return Err(Error::contract(format!(
                "confusion index ({gt}, {pred}) out of range for {} classes",
                self.num_classes
            )));
        }
        self.counts[gt * self.num_classes + pred] += 1;
        Ok(())
    }

    pub fn count(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.num_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.num_classes != self.num_classes {
            return Err(Error::contract("cannot merge confusion matrices of different sizes"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// `IoU_c = TP / (TP + FP + FN)`; zero-union classes are left out of the mean.
    pub fn iou(&self) -> Result<IouSummary> {
        let n = self.num_classes;
        let per_class: Vec<Option<f64>> = (0..n)
            .map(|c| {
                let tp = self.count(c, c);
                let row: u64 = (0..n).map(|p| self.count(c, p)).sum();
                let col: u64 = (0..n).map(|g| self.count(g, c)).sum();
                let union = row + col - tp;
                (union > 0).then(|| tp as f64 / union as f64)
            })
            .collect();
        let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
        if defined.is_empty() {
            return Err(Error::NoData);
        }
        let miou = defined.iter().sum::<f64>() / defined.len() as f64;
        Ok(IouSummary { per_class, miou })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputRecord {
    pub scans: usize,
    pub points: usize,
    pub wall_time: f64,
    /// Scans per second.
    pub fps: f64,
}

pub fn measure_fps(scans: usize, points: usize, wall_time: f64) -> Result<ThroughputRecord> {
    if !(wall_time.is_finite() && wall_time > 0.0) {
        return Err(Error::contract(format!(
            "wall time must be positive, got {wall_time}"
        )));
    }
    Ok(ThroughputRecord {
        scans,
        points,
        wall_time,
        fps: scans as f64 / wall_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_rows(rows: &[&[u64]]) -> ConfusionMatrix {
        let mut cm = ConfusionMatrix::new(rows.len());
        for (g, row) in rows.iter().enumerate() {
            for (p, &k) in row.iter().enumerate() {
                for _ in 0..k {
                    cm.accumulate(g, p).unwrap();
                }
            }
        }
        cm
    }

    #[test]
    fn accumulate_counts() {
        let mut cm = ConfusionMatrix::new(3);
        cm.accumulate(0, 0).unwrap();
        assert_eq!(cm.count(0, 0), 1);
        assert_eq!(cm.total(), 1);
        for i in 0..99 {
            cm.accumulate(i % 3, (i + 1) % 3).unwrap();
        }
        assert_eq!(cm.total(), 100);
        assert!(cm.accumulate(0, 3).is_err());
    }

    #[test]
    fn worked_two_class_example() {
        let s = from_rows(&[&[3, 1], &[1, 5]]).iou().unwrap();
        assert!((s.per_class[0].unwrap() - 0.6).abs() < 1e-12);
        assert!((s.per_class[1].unwrap() - 5.0 / 7.0).abs() < 1e-12);
        assert!((s.miou - 0.657).abs() < 1e-3);
    }

    #[test]
    fn perfect_and_missing_classes() {
        let s = from_rows(&[&[4, 0, 0], &[0, 0, 0], &[0, 0, 2]]).iou().unwrap();
        assert_eq!(s.per_class, vec![Some(1.0), None, Some(1.0)]);
        assert_eq!(s.miou, 1.0);
        assert!(matches!(ConfusionMatrix::new(2).iou(), Err(Error::NoData)));
    }

    #[test]
    fn fps() {
        assert_eq!(measure_fps(100, 0, 2.0).unwrap().fps, 50.0);
        assert_eq!(measure_fps(0, 0, 1.0).unwrap().fps, 0.0);
        assert!(measure_fps(1, 1, 0.0).is_err());
        assert!(measure_fps(1, 1, -1.0).is_err());
        // reference ratio: 84.50 vs 43.48 FPS is a ~1.94x speedup
        assert!((84.50f64 / 43.48 - 1.943).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn order_and_sharding_do_not_matter(
            pairs in proptest::collection::vec((0usize..5, 0usize..5), 1..200),
            split in 0usize..200,
        ) {
            let mut forward = ConfusionMatrix::new(5);
            let mut backward = ConfusionMatrix::new(5);
            for &(g, p) in &pairs { forward.accumulate(g, p).unwrap(); }
            for &(g, p) in pairs.iter().rev() { backward.accumulate(g, p).unwrap(); }
            prop_assert_eq!(&forward, &backward);

            let split = split.min(pairs.len());
            let mut left = ConfusionMatrix::new(5);
            let mut right = ConfusionMatrix::new(5);
            for &(g, p) in &pairs[..split] { left.accumulate(g, p).unwrap(); }
            for &(g, p) in &pairs[split..] { right.accumulate(g, p).unwrap(); }
            left.merge(&right).unwrap();
            prop_assert_eq!(&left, &forward);

            let s = forward.iou().unwrap();
            prop_assert!((0.0..=1.0).contains(&s.miou));
            prop_assert!(s.per_class.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
