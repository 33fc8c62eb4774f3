use std::ops::Range;
use std::path::Path;

use super::bytes::Reader;
use super::IGNORE_LABEL;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"HFEA";
const VERSION: u32 = 1;

/// Per-point feature vectors and labels for one stage, kept flat and
/// partitioned into scans.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatureSet {
    feature_dim: usize,
    features: Vec<f32>,
    labels: Vec<u16>,
    // exclusive end offset of each scan; strictly increasing
    scan_ends: Vec<usize>,
}

impl LabeledFeatureSet {
    pub fn new(feature_dim: usize) -> Result<Self> {
        if feature_dim == 0 {
            return Err(Error::config("feature_dim must be at least 1"));
        }
        Ok(LabeledFeatureSet {
            feature_dim,
            features: Vec::new(),
            labels: Vec::new(),
            scan_ends: Vec::new(),
        })
    }

    pub fn from_parts(
        feature_dim: usize,
        features: Vec<f32>,
        labels: Vec<u16>,
        scan_ends: Vec<usize>,
    ) -> Result<Self> {
        let set = LabeledFeatureSet {
            features,
            labels,
            scan_ends,
            ..LabeledFeatureSet::new(feature_dim)?
        };
        if set.features.len() != set.labels.len() * feature_dim {
            return Err(Error::contract(format!(
                "{} feature values do not match {} labels of width {feature_dim}",
                set.features.len(),
                set.labels.len()
            )));
        }
        let mut prev = 0;
        for &end in &set.scan_ends {
            if end <= prev {
                return Err(Error::contract("scan boundaries must be strictly increasing"));
            }
            prev = end;
        }
        if prev != set.labels.len() {
            return Err(Error::contract(format!(
                "last scan boundary {prev} does not equal point count {}",
                set.labels.len()
            )));
        }
        if let Some(pos) = set.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "point {} has a non-finite feature",
                pos / feature_dim
            )));
        }
        Ok(set)
    }

    /// Appends one scan; empty scans are skipped.
    pub fn push_scan(&mut self, features: &[f32], labels: &[u16]) -> Result<()> {
        if features.len() != labels.len() * self.feature_dim {
            return Err(Error::contract(format!(
                "scan has {} feature values for {} labels of width {}",
                features.len(),
                labels.len(),
                self.feature_dim
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "point {} of the scan has a non-finite feature",
                pos / self.feature_dim
            )));
        }
        if labels.is_empty() {
            return Ok(());
        }
        self.features.extend_from_slice(features);
        self.labels.extend_from_slice(labels);
        self.scan_ends.push(self.labels.len());
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f32] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    pub fn label(&self, i: usize) -> u16 {
        self.labels[i]
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn scan_ends(&self) -> &[usize] {
        &self.scan_ends
    }

    pub fn scan_count(&self) -> usize {
        self.scan_ends.len()
    }

    pub fn scan_range(&self, scan: usize) -> Range<usize> {
        let start = if scan == 0 { 0 } else { self.scan_ends[scan - 1] };
        start..self.scan_ends[scan]
    }

    /// Point ranges covering consecutive groups of `batch_size` scans.
    pub fn batch_ranges(&self, batch_size: usize) -> Vec<Range<usize>> {
        let batch_size = batch_size.max(1);
        (0..self.scan_count())
            .step_by(batch_size)
            .map(|first| {
                let last = (first + batch_size).min(self.scan_count()) - 1;
                self.scan_range(first).start..self.scan_range(last).end
            })
            .collect()
    }

    /// Copy with every ignore-labelled point removed; scans that become empty
    /// disappear.
    pub fn without_ignored(&self) -> Self {
        if !self.labels.contains(&IGNORE_LABEL) {
            return self.clone();
        }
        let mut out = LabeledFeatureSet {
            feature_dim: self.feature_dim,
            features: Vec::new(),
            labels: Vec::new(),
            scan_ends: Vec::new(),
        };
        for s in 0..self.scan_count() {
            for i in self.scan_range(s) {
                if self.labels[i] != IGNORE_LABEL {
                    out.features.extend_from_slice(self.point(i));
                    out.labels.push(self.labels[i]);
                }
            }
            if out.labels.len() > out.scan_ends.last().copied().unwrap_or(0) {
                out.scan_ends.push(out.labels.len());
            }
        }
        out
    }

    /// Fails if any label other than the ignore sentinel is `>= num_classes`.
    pub fn check_labels(&self, num_classes: usize) -> Result<()> {
        match self
            .labels
            .iter()
            .position(|&l| l != IGNORE_LABEL && l as usize >= num_classes)
        {
            Some(i) => Err(Error::contract(format!(
                "point {i} has label {} but there are only {num_classes} classes",
                self.labels[i]
            ))),
            None => Ok(()),
        }
    }
}

/// One scan of precomputed features.
///
/// Layout: magic `HFEA`, version u32, point_count u32, feature_dim u32, then
/// `point_count * feature_dim` f32 values and `point_count` u16 labels, all
/// little-endian.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub feature_dim: usize,
    pub features: Vec<f32>,
    pub labels: Vec<u16>,
}

impl FeatureFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.features.len() + 2 * self.labels.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.labels.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.feature_dim as u32).to_le_bytes());
        for v in &self.features {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for l in &self.labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC)?;
        r.expect_version(VERSION)?;
        let points = r.u32()? as usize;
        let feature_dim = r.u32()? as usize;
        if feature_dim == 0 {
            return Err(Error::format("feature file declares feature_dim 0"));
        }
        // f32 features plus one u16 label per point
        let per_point = feature_dim
            .checked_mul(4)
            .and_then(|b| b.checked_add(2))
            .ok_or_else(|| Error::format("feature_dim overflows"))?;
        r.expect_remaining(points, per_point)?;
        let mut features = Vec::with_capacity(points * feature_dim);
        for i in 0..points * feature_dim {
            let v = r.f32()?;
            if !v.is_finite() {
                return Err(Error::format(format!(
                    "point {} has a non-finite feature",
                    i / feature_dim
                )));
            }
            features.push(v);
        }
        let labels = (0..points).map(|_| r.u16()).collect::<Result<Vec<_>>>()?;
        Ok(FeatureFile {
            feature_dim,
            features,
            labels,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        FeatureFile::from_bytes(&bytes)
            .map_err(|e| Error::format(format!("{}: {e}", path.display())))
    }
}
