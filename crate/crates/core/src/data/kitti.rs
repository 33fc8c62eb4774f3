//! SemanticKITTI scan containers.
//!
//! `.bin`: consecutive `(x, y, z, remission)` little-endian f32 quadruples.
//! `.label`: one little-endian u32 per point; the low 16 bits hold the raw
//! semantic class and the high 16 bits an instance id.

use super::ClassRemap;
use crate::{Error, Result};

const POINT_BYTES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub intensity: f32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloudScan {
    pub points: Vec<Point>,
    /// Contiguous class per point (or [`crate::IGNORE_LABEL`]), once labelled.
    pub labels: Option<Vec<u16>>,
}

impl PointCloudScan {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A decoded `.label` word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelWord {
    pub semantic: u16,
    pub instance: u16,
}

impl LabelWord {
    pub fn from_u32(word: u32) -> Self {
        LabelWord {
            semantic: (word & 0xFFFF) as u16,
            instance: (word >> 16) as u16,
        }
    }

    pub fn to_u32(self) -> u32 {
        (self.instance as u32) << 16 | self.semantic as u32
    }
}

pub fn parse_kitti_bin(bytes: &[u8]) -> Result<PointCloudScan> {
    if bytes.len() % POINT_BYTES != 0 {
        return Err(Error::format(format!(
            "velodyne scan length {} is not a multiple of {POINT_BYTES}",
            bytes.len()
        )));
    }
    let mut points = Vec::with_capacity(bytes.len() / POINT_BYTES);
    for (i, chunk) in bytes.chunks_exact(POINT_BYTES).enumerate() {
        let f = |k: usize| f32::from_le_bytes(chunk[4 * k..4 * k + 4].try_into().unwrap());
        let p = Point {
            x: f(0),
            y: f(1),
            z: f(2),
            intensity: f(3),
        };
        if ![p.x, p.y, p.z, p.intensity].iter().all(|v| v.is_finite()) {
            return Err(Error::format(format!("point {i} has a non-finite value")));
        }
        points.push(p);
    }
    Ok(PointCloudScan {
        points,
        labels: None,
    })
}

pub fn serialize_kitti_bin(scan: &PointCloudScan) -> Vec<u8> {
    let mut out = Vec::with_capacity(scan.len() * POINT_BYTES);
    for p in &scan.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn parse_label_words(bytes: &[u8]) -> Result<Vec<LabelWord>> {
    if bytes.len() % 4 != 0 {
        return Err(Error::format(format!(
            "label file length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| LabelWord::from_u32(u32::from_le_bytes(c.try_into().unwrap())))
        .collect())
}

pub fn serialize_label_words(words: &[LabelWord]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_u32().to_le_bytes()).collect()
}

/// Attaches remapped semantic labels to `scan`; instance ids are dropped and
/// raw classes missing from `remap` become the ignore sentinel.
pub fn parse_kitti_label(
    bytes: &[u8],
    mut scan: PointCloudScan,
    remap: &ClassRemap,
) -> Result<PointCloudScan> {
    if bytes.len() != 4 * scan.len() {
        return Err(Error::format(format!(
            "label file has {} bytes, scan has {} points ({} bytes expected)",
            bytes.len(),
            scan.len(),
            4 * scan.len()
        )));
    }
    let words = parse_label_words(bytes)?;
    scan.labels = Some(words.iter().map(|w| remap.map(w.semantic)).collect());
    Ok(scan)
}
