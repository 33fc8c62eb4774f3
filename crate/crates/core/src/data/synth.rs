//! Seeded Gaussian-cluster benchmark with a per-class mean shift between the
//! pre-deployment stage and the post-deployment (adapt and test) stages.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::LabeledFeatureSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageCounts {
    pub pretrain: usize,
    pub adapt: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDriftSpec {
    pub num_classes: usize,
    pub feature_dim: usize,
    pub points_per_scan: usize,
    pub scans: StageCounts,
    pub class_means: Vec<Vec<f32>>,
    pub class_scale: f32,
    /// Added to each class mean in the adapt and test stages.
    pub drift_shift: Vec<Vec<f32>>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStages {
    pub pretrain: LabeledFeatureSet,
    pub adapt: LabeledFeatureSet,
    pub test: LabeledFeatureSet,
}

impl SyntheticDriftSpec {
    /// The default drift benchmark: six classes centred at `mean_scale * e_c`
    /// in a 16-dimensional space, unit noise, and each class pushed by
    /// `drift` towards the axis of the next class (`drift * e_{c+1}`).
    ///
    /// The shift moves every cluster across part of the old decision
    /// boundary, while the shifted clusters stay as far apart from each other
    /// as the originals, so the drift costs accuracy but is recoverable.
    pub fn benchmark(seed: u64) -> Self {
        Self::with_geometry(6, 16, 4.0, 2.0, seed)
    }

    pub fn with_geometry(
        num_classes: usize,
        feature_dim: usize,
        mean_scale: f32,
        drift: f32,
        seed: u64,
    ) -> Self {
        let axis = |c: usize, scale: f32| {
            let mut v = vec![0.0; feature_dim];
            if feature_dim > 0 {
                v[c % feature_dim] = scale;
            }
            v
        };
        SyntheticDriftSpec {
            num_classes,
            feature_dim,
            points_per_scan: 2000,
            scans: StageCounts {
                pretrain: 20,
                adapt: 20,
                test: 20,
            },
            class_means: (0..num_classes).map(|c| axis(c, mean_scale)).collect(),
            class_scale: 1.0,
            drift_shift: (0..num_classes)
                .map(|c| axis((c + 1) % num_classes, drift))
                .collect(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.num_classes;
        if c == 0 || c >= crate::IGNORE_LABEL as usize {
            return Err(Error::config(format!("num_classes {c} out of range")));
        }
        if self.feature_dim == 0 || self.points_per_scan == 0 {
            return Err(Error::config("feature_dim and points_per_scan must be at least 1"));
        }
        if self.scans.pretrain == 0 || self.scans.adapt == 0 || self.scans.test == 0 {
            return Err(Error::config("every stage needs at least one scan"));
        }
        if !(self.class_scale.is_finite() && self.class_scale >= 0.0) {
            return Err(Error::config("class_scale must be finite and non-negative"));
        }
        for (name, rows) in [("class_means", &self.class_means), ("drift_shift", &self.drift_shift)] {
            if rows.len() != c || rows.iter().any(|r| r.len() != self.feature_dim) {
                return Err(Error::config(format!(
                    "{name} must be {c} rows of {} values",
                    self.feature_dim
                )));
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("{name} has non-finite values")));
            }
        }
        for a in 0..c {
            for b in a + 1..c {
                if self.class_means[a] == self.class_means[b] {
                    return Err(Error::config(format!("class means {a} and {b} coincide")));
                }
            }
        }
        Ok(())
    }
}

pub fn generate_synthetic(spec: &SyntheticDriftSpec) -> Result<SyntheticStages> {
    spec.validate()?;
    Ok(SyntheticStages {
        pretrain: generate_stage(spec, 0, spec.scans.pretrain, false)?,
        adapt: generate_stage(spec, 1, spec.scans.adapt, true)?,
        test: generate_stage(spec, 2, spec.scans.test, true)?,
    })
}

// Each stage draws from its own ChaCha stream, so stages share no samples.
fn generate_stage(
    spec: &SyntheticDriftSpec,
    stream: u64,
    scans: usize,
    drifted: bool,
) -> Result<LabeledFeatureSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let centres: Vec<Vec<f32>> = (0..spec.num_classes)
        .map(|c| {
            let mut m = spec.class_means[c].clone();
            if drifted {
                for (v, d) in m.iter_mut().zip(&spec.drift_shift[c]) {
                    *v += d;
                }
            }
            m
        })
        .collect();

    let mut set = LabeledFeatureSet::new(spec.feature_dim)?;
    let mut labels: Vec<u16> = Vec::with_capacity(spec.points_per_scan);
    let mut features = Vec::with_capacity(spec.points_per_scan * spec.feature_dim);
    for _ in 0..scans {
        labels.clear();
        labels.extend((0..spec.points_per_scan).map(|i| (i % spec.num_classes) as u16));
        labels.shuffle(&mut rng);
        features.clear();
        for &l in &labels {
            for &m in &centres[l as usize] {
                let noise: f32 = StandardNormal.sample(&mut rng);
                features.push(m + spec.class_scale * noise);
            }
        }
        set.push_scan(&features, &labels)?;
    }
    Ok(set)
}
