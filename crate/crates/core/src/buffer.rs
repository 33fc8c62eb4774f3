//! Loss-ranked buffer selection for post-deployment retraining.
//!
//! After the first full pass every point carries its last observed loss.
//! Each retraining epoch then trains on `k%` of the points: the highest-loss
//! half ("hard") plus a seeded uniform sample of the rest. Only the buffer's
//! losses are refreshed; all other entries keep their previous value.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::hdc::{ClassModel, Encoder};
use crate::{Error, LabeledFeatureSet, Result, IGNORE_LABEL};

/// Pool the random half is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionScope {
    /// Select over the whole stage once per epoch.
    #[default]
    Epoch,
    /// Select independently inside every batch of scans.
    Batch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BufferConfig {
    /// Share of points retrained per epoch, in `(0, 100]`.
    pub ratio_percent: f64,
    pub seed: u64,
    pub scope: SelectionScope,
}

impl BufferConfig {
    pub fn new(ratio_percent: f64, seed: u64) -> Self {
        BufferConfig {
            ratio_percent,
            seed,
            scope: SelectionScope::Epoch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio_percent > 0.0 && self.ratio_percent <= 100.0) {
            return Err(Error::config(format!(
                "buffer ratio must be in (0, 100], got {}",
                self.ratio_percent
            )));
        }
        Ok(())
    }

    /// `(hard, random)` counts for a pool of `n` points.
    ///
    /// The hard half is `floor(n * k / 200)`; the random half tops the buffer
    /// up to `floor(n * k / 100)`, so `k = 100` always covers the whole pool.
    pub fn sizes(&self, n: usize) -> (usize, usize) {
        let hard = (n as f64 * self.ratio_percent / 200.0).floor() as usize;
        let total = ((n as f64 * self.ratio_percent / 100.0).floor() as usize).min(n);
        let hard = hard.min(total);
        (hard, total - hard)
    }
}

/// Indices chosen for one retraining pass, each half sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BufferSelection {
    pub hard: Vec<usize>,
    pub random: Vec<usize>,
}

impl BufferSelection {
    pub fn len(&self) -> usize {
        self.hard.len() + self.random.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.hard.binary_search(&i).is_ok() || self.random.binary_search(&i).is_ok()
    }

    /// Both halves merged in stream order.
    pub fn merged(&self) -> Vec<usize> {
        let mut all = Vec::with_capacity(self.len());
        all.extend_from_slice(&self.hard);
        all.extend_from_slice(&self.random);
        all.sort_unstable();
        all
    }

    fn extend(&mut self, other: BufferSelection) {
        self.hard.extend(other.hard);
        self.random.extend(other.random);
    }
}

/// Last observed loss of every point in the stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossStore {
    losses: Vec<f64>,
    initialized: bool,
}

impl LossStore {
    pub fn new(len: usize) -> Self {
        LossStore {
            losses: vec![0.0; len],
            initialized: false,
        }
    }

    pub fn from_losses(losses: Vec<f64>) -> Result<Self> {
        check_losses(losses.iter().copied().enumerate())?;
        Ok(LossStore {
            losses,
            initialized: true,
        })
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    /// Scores every point of `data` under `model`. Ignore-labelled points get 0.
    pub fn init_losses(
        &mut self,
        model: &ClassModel,
        data: &LabeledFeatureSet,
        encoder: &Encoder,
    ) -> Result<()> {
        if data.len() != self.losses.len() {
            return Err(Error::contract(format!(
                "loss store holds {} points, dataset has {}",
                self.losses.len(),
                data.len()
            )));
        }
        let losses = (0..data.len())
            .into_par_iter()
            .map_init(Vec::new, |scratch, i| {
                let label = data.label(i);
                if label == IGNORE_LABEL {
                    return Ok(0.0);
                }
                let hv = encoder.encode_with(data.point(i), scratch)?;
                model.point_loss(&hv, label as usize)
            })
            .collect::<Result<Vec<f64>>>()?;
        self.losses = losses;
        self.initialized = true;
        Ok(())
    }

    /// Selection over the whole store for `epoch`.
    pub fn select(&self, cfg: &BufferConfig, epoch: u64) -> Result<BufferSelection> {
        self.select_range(cfg, 0..self.losses.len(), epoch)
    }

    /// One selection per batch range, merged. The random draw of batch `b`
    /// uses stream `epoch << 32 | b`.
    pub fn select_batches(
        &self,
        cfg: &BufferConfig,
        epoch: u64,
        batches: &[Range<usize>],
    ) -> Result<BufferSelection> {
        let mut out = BufferSelection::default();
        for (b, range) in batches.iter().enumerate() {
            out.extend(self.select_range(cfg, range.clone(), epoch << 32 | b as u64)?);
        }
        Ok(out)
    }

    /// Hard half: highest losses, ties to the lower index. Random half: a
    /// uniform sample without replacement from the rest of `range`, drawn
    /// from ChaCha8 stream `stream` of `cfg.seed`.
    pub fn select_range(
        &self,
        cfg: &BufferConfig,
        range: Range<usize>,
        stream: u64,
    ) -> Result<BufferSelection> {
        if !self.initialized {
            return Err(Error::Uninitialized);
        }
        cfg.validate()?;
        if range.end > self.losses.len() || range.start > range.end {
            return Err(Error::contract(format!(
                "selection range {range:?} outside store of {}",
                self.losses.len()
            )));
        }
        let (n_hard, n_random) = cfg.sizes(range.len());

        let losses = &self.losses;
        let mut pool: Vec<usize> = range.collect();
        if n_hard > 0 && n_hard < pool.len() {
            pool.select_nth_unstable_by(n_hard - 1, |&a, &b| {
                losses[b].total_cmp(&losses[a]).then(a.cmp(&b))
            });
        }
        let mut hard = pool[..n_hard].to_vec();
        hard.sort_unstable();
        let mut rest = pool.split_off(n_hard);
        rest.sort_unstable();

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(stream);
        let mut random: Vec<usize> = index::sample(&mut rng, rest.len(), n_random)
            .into_iter()
            .map(|k| rest[k])
            .collect();
        random.sort_unstable();
        Ok(BufferSelection { hard, random })
    }

    /// Overwrites the losses of buffered points; every key must belong to
    /// `selection`. Nothing is written if any entry is rejected.
    pub fn record_losses(
        &mut self,
        selection: &BufferSelection,
        updates: &[(usize, f64)],
    ) -> Result<()> {
        if let Some(&(i, _)) = updates.iter().find(|(i, _)| !selection.contains(*i)) {
            return Err(Error::contract(format!("point {i} is not in the current buffer")));
        }
        check_losses(updates.iter().copied())?;
        if let Some(&(i, _)) = updates.iter().find(|(i, _)| *i >= self.losses.len()) {
            return Err(Error::contract(format!("point {i} outside the loss store")));
        }
        for &(i, loss) in updates {
            self.losses[i] = loss;
        }
        Ok(())
    }

    pub(crate) fn set_all(&mut self, losses: Vec<f64>) {
        debug_assert_eq!(losses.len(), self.losses.len());
        self.losses = losses;
        self.initialized = true;
    }

    /// `point_index,loss` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point_index,loss\n");
        for (i, l) in self.losses.iter().enumerate() {
            let _ = writeln!(out, "{i},{l}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn check_losses(values: impl Iterator<Item = (usize, f64)>) -> Result<()> {
    for (i, l) in values {
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::contract(format!(
                "loss for point {i} must be finite and non-negative, got {l}"
            )));
        }
    }
    Ok(())
}
