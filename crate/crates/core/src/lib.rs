//! Hyperdimensional-computing semantic segmentation for LiDAR point clouds.
//!
//! The crate is organised around the three stages of a deployed segmenter:
//!
//! 1. [`pipeline::pretrain`] builds a random-projection [`Encoder`] and bundles
//!    labelled features into a [`ClassModel`].
//! 2. [`pipeline::adapt`] refines the class accumulators on a drifted stream with
//!    perceptron updates, optionally restricted to a loss-ranked buffer
//!    ([`buffer`]) after the first full pass.
//! 3. [`pipeline::evaluate`] scores a model on a held-out set with per-class IoU.
//!
//! Input comes from KITTI-style `.bin`/`.label` scans or precomputed feature
//! files ([`data`]); [`data::synth`] generates seeded drift benchmarks.

pub mod buffer;
pub mod config;
pub mod data;
mod error;
pub mod hdc;
pub mod metrics;
pub mod pipeline;

pub use buffer::{BufferConfig, BufferSelection, LossStore, SelectionScope};
pub use data::{LabeledFeatureSet, IGNORE_LABEL};
pub use error::{Error, Result};
pub use hdc::{ClassModel, Encoder, EncoderParams, Hypervector, Prediction};
pub use metrics::{ConfusionMatrix, IouSummary, ThroughputRecord};
pub use pipeline::{AdaptationReport, BufferMode, EpochRecord, StageConfig};
