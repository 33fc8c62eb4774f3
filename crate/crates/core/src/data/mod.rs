//! Input data: KITTI scans, precomputed feature files, the geometric
//! stand-in extractor and the synthetic drift generator.

pub(crate) mod bytes;
mod features;
pub mod geometric;
pub mod kitti;
mod remap;
pub mod synth;

use std::path::{Path, PathBuf};

pub use features::{FeatureFile, LabeledFeatureSet};
pub use geometric::{extract_geometric_features, GeometricParams};
pub use kitti::{parse_kitti_bin, parse_kitti_label, PointCloudScan};
pub use remap::ClassRemap;
pub use synth::{generate_synthetic, SyntheticDriftSpec, SyntheticStages};

use crate::{Error, Result};

/// Label value for points excluded from training and metrics.
pub const IGNORE_LABEL: u16 = u16::MAX;

/// How to turn raw KITTI scans into features when a stage directory holds
/// `velodyne/` and `labels/` rather than feature files.
#[derive(Debug, Clone)]
pub struct KittiSource {
    pub remap: ClassRemap,
    pub geometry: GeometricParams,
}

fn sorted_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Writes one feature file per scan as `scan_NNNNNN.hfea`.
pub fn save_stage(dir: &Path, set: &LabeledFeatureSet) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for s in 0..set.scan_count() {
        let range = set.scan_range(s);
        let file = FeatureFile {
            feature_dim: set.feature_dim(),
            features: set.features()[range.start * set.feature_dim()..range.end * set.feature_dim()]
                .to_vec(),
            labels: set.labels()[range].to_vec(),
        };
        file.save(&dir.join(format!("scan_{s:06}.hfea")))?;
    }
    Ok(())
}

/// Loads a stage from a single `.hfea` file, a directory of `.hfea` files
/// (one scan each, in file-name order), or a KITTI sequence directory with
/// `velodyne/*.bin` and matching `labels/*.label`.
pub fn load_stage(path: &Path, kitti: Option<&KittiSource>) -> Result<LabeledFeatureSet> {
    if path.is_file() {
        let f = FeatureFile::load(path)?;
        let mut set = LabeledFeatureSet::new(f.feature_dim)?;
        set.push_scan(&f.features, &f.labels)?;
        return Ok(set);
    }
    if !path.is_dir() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "stage data not found"),
        ));
    }
    let velodyne = path.join("velodyne");
    if velodyne.is_dir() {
        let source = kitti.ok_or_else(|| {
            Error::config(format!(
                "{} is a KITTI sequence but no class remap was configured",
                path.display()
            ))
        })?;
        return load_kitti_sequence(path, source);
    }

    let files = sorted_files(path, "hfea")?;
    let mut set: Option<LabeledFeatureSet> = None;
    for file in &files {
        let f = FeatureFile::load(file)?;
        let set = match &mut set {
            Some(s) => s,
            None => set.insert(LabeledFeatureSet::new(f.feature_dim)?),
        };
        if f.feature_dim != set.feature_dim() {
            return Err(Error::format(format!(
                "{} has feature_dim {}, earlier scans have {}",
                file.display(),
                f.feature_dim,
                set.feature_dim()
            )));
        }
        set.push_scan(&f.features, &f.labels)?;
    }
    set.filter(|s| !s.is_empty()).ok_or_else(|| {
        Error::format(format!("{} contains no feature data", path.display()))
    })
}

fn load_kitti_sequence(dir: &Path, source: &KittiSource) -> Result<LabeledFeatureSet> {
    let mut set = LabeledFeatureSet::new(source.geometry.feature_dim)?;
    for bin_path in sorted_files(&dir.join("velodyne"), "bin")? {
        let stem = bin_path.file_stem().unwrap_or_default();
        let label_path = dir.join("labels").join(stem).with_extension("label");
        let bin = std::fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
        let labels = std::fs::read(&label_path).map_err(|e| Error::io(&label_path, e))?;
        let with_path = |p: &Path, e: Error| Error::format(format!("{}: {e}", p.display()));
        let scan = parse_kitti_bin(&bin).map_err(|e| with_path(&bin_path, e))?;
        let scan = parse_kitti_label(&labels, scan, &source.remap)
            .map_err(|e| with_path(&label_path, e))?;
        if scan.is_empty() {
            continue;
        }
        let features = extract_geometric_features(&scan, &source.geometry)?;
        set.push_scan(&features, scan.labels.as_deref().unwrap_or_default())?;
    }
    if set.is_empty() {
        return Err(Error::format(format!("{} contains no scans", dir.display())));
    }
    Ok(set)
}
