//! Hand-built per-point features used when no learned extractor output is
//! available.
//!
//! The first eight features are `x, y, z, intensity, range, azimuth,
//! elevation, height` (height is `z + sensor_height`). Further dimensions are
//! `tanh(a * f_i + b * f_j)` over fixed pairs of base features with fixed
//! coefficients; a smaller `feature_dim` truncates the base list.

use super::kitti::{Point, PointCloudScan};
use crate::{Error, Result};

const BASE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricParams {
    pub feature_dim: usize,
    /// Mounting height of the sensor above ground, in metres.
    pub sensor_height: f32,
}

impl GeometricParams {
    pub fn new(feature_dim: usize) -> Self {
        GeometricParams {
            feature_dim,
            sensor_height: 1.73,
        }
    }
}

fn base_features(p: &Point, sensor_height: f32) -> [f32; BASE] {
    let planar = (p.x * p.x + p.y * p.y).sqrt();
    let range = (planar * planar + p.z * p.z).sqrt();
    // atan2(0, 0) is 0 in IEEE arithmetic, but keep the origin rule explicit.
    let (azimuth, elevation) = if range == 0.0 {
        (0.0, 0.0)
    } else {
        (p.y.atan2(p.x), p.z.atan2(planar))
    };
    [
        p.x,
        p.y,
        p.z,
        p.intensity,
        range,
        azimuth,
        elevation,
        p.z + sensor_height,
    ]
}

fn mixed_feature(base: &[f32; BASE], k: usize) -> f32 {
    let i = k % BASE;
    let j = (3 * k + 1) % BASE;
    let round = (k / BASE) as f32;
    let a = 0.5 / (1.0 + round);
    let b = if k % 2 == 0 { 0.25 } else { -0.25 };
    (a * base[i] + b * base[j]).tanh()
}

/// Flat `scan.len() * feature_dim` feature matrix, one row per point.
pub fn extract_geometric_features(
    scan: &PointCloudScan,
    params: &GeometricParams,
) -> Result<Vec<f32>> {
    if scan.is_empty() {
        return Err(Error::contract("cannot extract features from an empty scan"));
    }
    if params.feature_dim == 0 {
        return Err(Error::config("feature_dim must be at least 1"));
    }
    let mut out = Vec::with_capacity(scan.len() * params.feature_dim);
    for p in &scan.points {
        let base = base_features(p, params.sensor_height);
        out.extend((0..params.feature_dim).map(|k| {
            if k < BASE {
                base[k]
            } else {
                mixed_feature(&base, k)
            }
        }));
    }
    Ok(out)
}
