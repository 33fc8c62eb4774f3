//! Pre-deployment training, post-deployment adaptation and evaluation.
//!
//! Points are always visited in stream order (scan by scan, point by point)
//! and grouped into batches of `batch_size` scans. Encoding fans out over the
//! rayon pool one chunk at a time; the model is then updated by a single
//! sequential reducer, so no classification ever sees a half-applied update.

use std::fmt::Write as _;
use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;

use crate::buffer::{BufferConfig, LossStore, SelectionScope};
use crate::hdc::{ClassModel, Encoder, EncoderParams, Hypervector};
use crate::metrics::{self, ConfusionMatrix};
use crate::{Error, LabeledFeatureSet, Result, IGNORE_LABEL};

/// Points encoded in parallel before the sequential update pass.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BufferMode {
    /// Every retraining epoch visits every point.
    FullData,
    Ratio(BufferConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageConfig {
    /// Scans per batch.
    pub batch_size: usize,
    /// Retraining epochs after the initial pass.
    pub retrain_epochs: usize,
    pub buffer: BufferMode,
    pub encoder: EncoderParams,
    pub num_classes: usize,
    /// Keep every hypervector from the first pass instead of re-encoding
    /// buffered points each epoch. Off by default: memory is `N * hd_dim`
    /// bytes and encoding cost is part of what the benchmarks measure.
    pub cache_hypervectors: bool,
}

impl StageConfig {
    /// Batch of 6 scans, 10 retraining epochs, a 5% buffer.
    pub fn new(encoder: EncoderParams, num_classes: usize) -> Self {
        StageConfig {
            batch_size: 6,
            retrain_epochs: 10,
            buffer: BufferMode::Ratio(BufferConfig::new(5.0, 0)),
            encoder,
            num_classes,
            cache_hypervectors: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if self.num_classes == 0 || self.num_classes >= IGNORE_LABEL as usize {
            return Err(Error::config(format!(
                "num_classes must be in 1..{}",
                IGNORE_LABEL
            )));
        }
        if let BufferMode::Ratio(b) = &self.buffer {
            b.validate()?;
        }
        self.encoder.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub miou: f64,
    pub per_class_iou: Vec<Option<f64>>,
    pub points_processed: usize,
    /// Seconds spent training in this epoch (or classifying, for a plain
    /// evaluation); held-out scoring is not included.
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptationReport {
    /// Epoch 0 is the initial full pass.
    pub epoch_records: Vec<EpochRecord>,
    pub final_model: ClassModel,
    /// Scans per second over all training epochs.
    pub throughput_fps: f64,
    pub losses: LossStore,
}

impl AdaptationReport {
    /// Mean training time of epochs 1.., or `None` without retraining epochs.
    pub fn mean_retrain_time(&self) -> Option<f64> {
        let retrain = &self.epoch_records[1..];
        (!retrain.is_empty())
            .then(|| retrain.iter().map(|r| r.wall_time).sum::<f64>() / retrain.len() as f64)
    }

    pub fn final_miou(&self) -> f64 {
        self.epoch_records.last().map_or(0.0, |r| r.miou)
    }

    /// One row per epoch, then a `# throughput_fps,<value>` summary line.
    pub fn to_csv(&self) -> String {
        let classes = self.final_model.num_classes();
        let mut out = csv_header(classes);
        for r in &self.epoch_records {
            out.push_str(&r.csv_row());
        }
        let _ = writeln!(out, "# throughput_fps,{}", self.throughput_fps);
        out
    }
}

pub fn csv_header(num_classes: usize) -> String {
    let mut out = String::from("epoch,miou");
    for c in 0..num_classes {
        let _ = write!(out, ",iou_class_{c}");
    }
    out.push_str(",points_processed,wall_time_s\n");
    out
}

impl EpochRecord {
    /// CSV row matching [`csv_header`]; undefined IoUs are left empty.
    pub fn csv_row(&self) -> String {
        let mut out = format!("{},{}", self.epoch, self.miou);
        for iou in &self.per_class_iou {
            match iou {
                Some(v) => {
                    let _ = write!(out, ",{v}");
                }
                None => out.push(','),
            }
        }
        let _ = writeln!(out, ",{},{}", self.points_processed, self.wall_time);
        out
    }
}

struct Trainer<'a> {
    encoder: &'a Encoder,
    data: &'a LabeledFeatureSet,
    batches: Vec<Range<usize>>,
    cache: Option<Vec<Hypervector>>,
}

impl<'a> Trainer<'a> {
    fn new(encoder: &'a Encoder, data: &'a LabeledFeatureSet, batch_size: usize) -> Self {
        Trainer {
            encoder,
            data,
            batches: data.batch_ranges(batch_size),
            cache: None,
        }
    }

    fn encode(&self, indices: &[usize]) -> Result<Vec<Hypervector>> {
        indices
            .par_iter()
            .map_init(Vec::new, |scratch, &i| {
                self.encoder.encode_with(self.data.point(i), scratch)
            })
            .collect()
    }

    /// Visits `indices` (sorted) batch by batch, handing each point's
    /// hypervector to `visit` in stream order.
    fn for_each_encoded(
        &self,
        indices: &[usize],
        mut visit: impl FnMut(usize, &Hypervector) -> Result<()>,
    ) -> Result<()> {
        for batch in &self.batches {
            let lo = indices.partition_point(|&i| i < batch.start);
            let hi = indices.partition_point(|&i| i < batch.end);
            for chunk in indices[lo..hi].chunks(CHUNK) {
                match &self.cache {
                    Some(cache) => {
                        for &i in chunk {
                            visit(i, &cache[i])?;
                        }
                    }
                    None => {
                        for (&i, hv) in chunk.iter().zip(self.encode(chunk)?) {
                            visit(i, &hv)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Perceptron pass over `indices`; returns `(index, pre-update loss)`.
    fn perceptron_pass(
        &self,
        model: &mut ClassModel,
        indices: &[usize],
    ) -> Result<Vec<(usize, f64)>> {
        let mut losses = Vec::with_capacity(indices.len());
        self.for_each_encoded(indices, |i, hv| {
            let outcome = model.step(hv, self.data.label(i) as usize)?;
            losses.push((i, outcome.loss));
            Ok(())
        })?;
        Ok(losses)
    }

    fn fill_cache(&mut self) -> Result<()> {
        let all: Vec<usize> = (0..self.data.len()).collect();
        let mut cache = Vec::with_capacity(all.len());
        for chunk in all.chunks(CHUNK) {
            cache.extend(self.encode(chunk)?);
        }
        self.cache = Some(cache);
        Ok(())
    }
}

fn prepare_stage(
    data: &LabeledFeatureSet,
    feature_dim: usize,
    num_classes: usize,
    what: &str,
) -> Result<LabeledFeatureSet> {
    if data.feature_dim() != feature_dim {
        return Err(Error::contract(format!(
            "{what} data has feature_dim {}, encoder expects {feature_dim}",
            data.feature_dim()
        )));
    }
    data.check_labels(num_classes)?;
    let data = data.without_ignored();
    if data.is_empty() {
        return Err(Error::config(format!("{what} data has no labelled points")));
    }
    Ok(data)
}

/// Builds the encoder, bundles every labelled point into its class, then runs
/// `retrain_epochs` full-data perceptron epochs.
pub fn pretrain(cfg: &StageConfig, data: &LabeledFeatureSet) -> Result<(Encoder, ClassModel)> {
    cfg.validate()?;
    let data = prepare_stage(data, cfg.encoder.feature_dim, cfg.num_classes, "pretrain")?;
    let encoder = Encoder::new(cfg.encoder)?;
    let mut model = ClassModel::new(cfg.num_classes, cfg.encoder.hd_dim)?;

    let mut trainer = Trainer::new(&encoder, &data, cfg.batch_size);
    if cfg.cache_hypervectors {
        trainer.fill_cache()?;
    }
    let all: Vec<usize> = (0..data.len()).collect();
    trainer.for_each_encoded(&all, |i, hv| model.bundle(hv, data.label(i) as usize))?;
    for _ in 0..cfg.retrain_epochs {
        trainer.perceptron_pass(&mut model, &all)?;
    }
    Ok((encoder, model))
}

/// Adapts `model` to `stream`, scoring it on `test` after every epoch.
///
/// Epoch 0 trains on every point and records each point's loss as it is
/// classified. Epochs `1..=retrain_epochs` train on the buffer picked from
/// those losses (or on everything in [`BufferMode::FullData`]) and refresh
/// the losses of the points they visited.
pub fn adapt(
    cfg: &StageConfig,
    encoder: &Encoder,
    model: ClassModel,
    stream: &LabeledFeatureSet,
    test: &LabeledFeatureSet,
) -> Result<AdaptationReport> {
    cfg.validate()?;
    if model.hd_dim() != encoder.hd_dim() {
        return Err(Error::contract(format!(
            "model has hd_dim {}, encoder has {}",
            model.hd_dim(),
            encoder.hd_dim()
        )));
    }
    let num_classes = model.num_classes();
    let stream = prepare_stage(stream, encoder.feature_dim(), num_classes, "adaptation")?;
    if test.feature_dim() != encoder.feature_dim() {
        return Err(Error::contract("test data feature_dim does not match the encoder"));
    }

    let mut model = model;
    let mut trainer = Trainer::new(encoder, &stream, cfg.batch_size);
    let mut store = LossStore::new(stream.len());
    let all: Vec<usize> = (0..stream.len()).collect();
    let mut records = Vec::with_capacity(cfg.retrain_epochs + 1);
    let mut train_time = 0.0;

    let start = Instant::now();
    if cfg.cache_hypervectors {
        trainer.fill_cache()?;
    }
    let initial = trainer.perceptron_pass(&mut model, &all)?;
    store.set_all(initial.into_iter().map(|(_, l)| l).collect());
    let elapsed = start.elapsed().as_secs_f64();
    train_time += elapsed;
    records.push(scored(encoder, &model, test, 0, all.len(), elapsed)?);

    for epoch in 1..=cfg.retrain_epochs {
        let start = Instant::now();
        let processed = match &cfg.buffer {
            BufferMode::FullData => {
                let losses = trainer.perceptron_pass(&mut model, &all)?;
                store.set_all(losses.into_iter().map(|(_, l)| l).collect());
                all.len()
            }
            BufferMode::Ratio(buffer) => {
                let selection = match buffer.scope {
                    SelectionScope::Epoch => store.select(buffer, epoch as u64)?,
                    SelectionScope::Batch => {
                        store.select_batches(buffer, epoch as u64, &trainer.batches)?
                    }
                };
                let indices = selection.merged();
                let losses = trainer.perceptron_pass(&mut model, &indices)?;
                store.record_losses(&selection, &losses)?;
                indices.len()
            }
        };
        let elapsed = start.elapsed().as_secs_f64();
        train_time += elapsed;
        records.push(scored(encoder, &model, test, epoch, processed, elapsed)?);
    }

    let scans = stream.scan_count() * records.len();
    let throughput_fps = if train_time > 0.0 {
        metrics::measure_fps(scans, stream.len(), train_time)?.fps
    } else {
        0.0
    };
    Ok(AdaptationReport {
        epoch_records: records,
        final_model: model,
        throughput_fps,
        losses: store,
    })
}

fn scored(
    encoder: &Encoder,
    model: &ClassModel,
    test: &LabeledFeatureSet,
    epoch: usize,
    processed: usize,
    train_time: f64,
) -> Result<EpochRecord> {
    let eval = evaluate(encoder, model, test)?;
    Ok(EpochRecord {
        epoch,
        points_processed: processed,
        wall_time: train_time,
        ..eval
    })
}

/// Confusion matrix of `model` over every labelled point in `test`.
pub fn confusion(
    encoder: &Encoder,
    model: &ClassModel,
    test: &LabeledFeatureSet,
) -> Result<ConfusionMatrix> {
    let n = model.num_classes();
    test.check_labels(n)?;
    (0..test.len())
        .into_par_iter()
        .filter(|&i| test.label(i) != IGNORE_LABEL)
        .try_fold(
            || (ConfusionMatrix::new(n), Vec::new()),
            |(mut cm, mut scratch), i| {
                let hv = encoder.encode_with(test.point(i), &mut scratch)?;
                let pred = model.classify(&hv)?;
                cm.accumulate(test.label(i) as usize, pred.label)?;
                Ok::<_, Error>((cm, scratch))
            },
        )
        .map(|r| r.map(|(cm, _)| cm))
        .try_reduce(
            || ConfusionMatrix::new(n),
            |mut a, b| {
                a.merge(&b)?;
                Ok(a)
            },
        )
}

/// Scores `model` on `test` without modifying it.
pub fn evaluate(
    encoder: &Encoder,
    model: &ClassModel,
    test: &LabeledFeatureSet,
) -> Result<EpochRecord> {
    if test.is_empty() {
        return Err(Error::config("test set is empty"));
    }
    if test.feature_dim() != encoder.feature_dim() || model.hd_dim() != encoder.hd_dim() {
        return Err(Error::contract("test data, encoder and model dimensions disagree"));
    }
    let start = Instant::now();
    let cm = confusion(encoder, model, test)?;
    let summary = cm.iou()?;
    Ok(EpochRecord {
        epoch: 0,
        miou: summary.miou,
        per_class_iou: summary.per_class,
        points_processed: cm.total() as usize,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
