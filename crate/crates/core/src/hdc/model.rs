use super::Hypervector;
use crate::{Error, Result};

/// Result of comparing a query hypervector against every class.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Smallest class index attaining the maximum similarity.
    pub label: usize,
    /// Cosine similarity per class; classes with an all-zero accumulator score 0.
    pub similarities: Vec<f64>,
}

/// What a single perceptron step did to the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub predicted: usize,
    /// Loss of the point under the model *before* the update.
    pub loss: f64,
    pub updated: bool,
}

/// Per-class integer accumulators (class hypervectors) with cached L2 norms.
///
/// Accumulators are kept as signed sums and never re-binarized. The squared
/// norm of every row is maintained exactly in integer arithmetic, so the cached
/// norms never drift from the accumulators.
#[derive(Debug, Clone)]
pub struct ClassModel {
    num_classes: usize,
    hd_dim: usize,
    accumulators: Vec<i32>,
    sq_norms: Vec<i128>,
    norms: Vec<f64>,
    /// Upper bound on `|entry|` per row; sizes the i32 partial sums in `dots`.
    abs_bounds: Vec<u64>,
}

impl PartialEq for ClassModel {
    fn eq(&self, other: &Self) -> bool {
        self.num_classes == other.num_classes
            && self.hd_dim == other.hd_dim
            && self.accumulators == other.accumulators
    }
}

impl ClassModel {
    pub fn new(num_classes: usize, hd_dim: usize) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::config("num_classes must be at least 1"));
        }
        if hd_dim == 0 {
            return Err(Error::config("hd_dim must be at least 1"));
        }
        let len = num_classes
            .checked_mul(hd_dim)
            .ok_or_else(|| Error::config("num_classes * hd_dim overflows"))?;
        Ok(ClassModel {
            num_classes,
            hd_dim,
            accumulators: vec![0; len],
            sq_norms: vec![0; num_classes],
            norms: vec![0.0; num_classes],
            abs_bounds: vec![0; num_classes],
        })
    }

    /// Builds a model from row-major accumulators (`num_classes` rows).
    pub fn from_accumulators(
        num_classes: usize,
        hd_dim: usize,
        accumulators: Vec<i32>,
    ) -> Result<Self> {
        let mut model = ClassModel::new(num_classes, hd_dim)?;
        if accumulators.len() != model.accumulators.len() {
            return Err(Error::contract(format!(
                "expected {} accumulator entries, got {}",
                model.accumulators.len(),
                accumulators.len()
            )));
        }
        model.accumulators = accumulators;
        for j in 0..num_classes {
            model.refresh_norm(j);
        }
        Ok(model)
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn hd_dim(&self) -> usize {
        self.hd_dim
    }

    pub fn accumulator(&self, class: usize) -> &[i32] {
        &self.accumulators[class * self.hd_dim..(class + 1) * self.hd_dim]
    }

    /// All accumulators, row-major.
    pub fn accumulators(&self) -> &[i32] {
        &self.accumulators
    }

    pub fn norm(&self, class: usize) -> f64 {
        self.norms[class]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// L2 norm of an accumulator computed from scratch, ignoring the cache.
    pub fn recomputed_norm(&self, class: usize) -> f64 {
        self.accumulator(class)
            .iter()
            .map(|&a| (a as f64) * (a as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_trained(&self) -> bool {
        self.sq_norms.iter().any(|&s| s > 0)
    }

    /// Adds `hv` into the accumulator of `label`.
    pub fn bundle(&mut self, hv: &Hypervector, label: usize) -> Result<()> {
        self.check_hv(hv)?;
        self.check_label(label)?;
        let dot = hv.dot(self.accumulator(label));
        self.add_signed(label, hv, 1, dot);
        Ok(())
    }

    /// Element-wise sum of two models trained on disjoint partitions.
    pub fn merge(&mut self, other: &ClassModel) -> Result<()> {
        if other.num_classes != self.num_classes || other.hd_dim != self.hd_dim {
            return Err(Error::contract(format!(
                "cannot merge a {}x{} model into a {}x{} model",
                other.num_classes, other.hd_dim, self.num_classes, self.hd_dim
            )));
        }
        for (a, &b) in self.accumulators.iter_mut().zip(&other.accumulators) {
            *a += b;
        }
        for j in 0..self.num_classes {
            self.refresh_norm(j);
        }
        Ok(())
    }

    pub fn classify(&self, hv: &Hypervector) -> Result<Prediction> {
        self.check_hv(hv)?;
        let dots = self.dots(hv);
        let (label, similarities) = self.rank(&dots)?;
        Ok(Prediction {
            label,
            similarities,
        })
    }

    /// Perceptron-style loss: 0 when the prediction is right, otherwise the
    /// cosine of the predicted class minus the cosine of the true class.
    pub fn point_loss(&self, hv: &Hypervector, true_label: usize) -> Result<f64> {
        self.check_label(true_label)?;
        let pred = self.classify(hv)?;
        Ok(loss_of(&pred.similarities, pred.label, true_label))
    }

    /// Applies the misclassification update; returns whether the model changed.
    pub fn adapt_update(&mut self, hv: &Hypervector, true_label: usize) -> Result<bool> {
        self.step(hv, true_label).map(|o| o.updated)
    }

    /// Classifies once, reports the pre-update loss, and applies the update
    /// `c_true += hv`, `c_pred -= hv` when the prediction is wrong.
    pub fn step(&mut self, hv: &Hypervector, true_label: usize) -> Result<StepOutcome> {
        self.check_hv(hv)?;
        self.check_label(true_label)?;
        let dots = self.dots(hv);
        let (predicted, sims) = self.rank(&dots)?;
        let loss = loss_of(&sims, predicted, true_label);
        let updated = predicted != true_label;
        if updated {
            self.add_signed(true_label, hv, 1, dots[true_label]);
            self.add_signed(predicted, hv, -1, dots[predicted]);
        }
        Ok(StepOutcome {
            predicted,
            loss,
            updated,
        })
    }

    fn dots(&self, hv: &Hypervector) -> Vec<i64> {
        self.accumulators
            .chunks_exact(self.hd_dim)
            .zip(&self.abs_bounds)
            .map(|(row, &bound)| {
                // each partial sum is at most chunk * bound in magnitude
                let chunk = (i32::MAX as u64 / bound.max(1)).clamp(1, self.hd_dim as u64) as usize;
                row.chunks(chunk)
                    .zip(hv.signs().chunks(chunk))
                    .map(|(a, s)| {
                        a.iter().zip(s).map(|(&a, &s)| a * s as i32).sum::<i32>() as i64
                    })
                    .sum()
            })
            .collect()
    }

    fn rank(&self, dots: &[i64]) -> Result<(usize, Vec<f64>)> {
        if !self.is_trained() {
            return Err(Error::Untrained);
        }
        let hv_norm = (self.hd_dim as f64).sqrt();
        let sims: Vec<f64> = dots
            .iter()
            .zip(&self.norms)
            .map(|(&d, &n)| if n > 0.0 { d as f64 / (hv_norm * n) } else { 0.0 })
            .collect();
        let mut best = 0;
        for (j, &s) in sims.iter().enumerate().skip(1) {
            if s > sims[best] {
                best = j;
            }
        }
        Ok((best, sims))
    }

    // ||c + s*hv||^2 = ||c||^2 + 2s<c,hv> + d, since <hv,hv> = d for bipolar hv.
    fn add_signed(&mut self, class: usize, hv: &Hypervector, sign: i32, dot: i64) {
        let d = self.hd_dim;
        let row = &mut self.accumulators[class * d..(class + 1) * d];
        for (a, &s) in row.iter_mut().zip(hv.signs()) {
            *a += sign * s as i32;
        }
        self.sq_norms[class] += 2 * sign as i128 * dot as i128 + d as i128;
        self.norms[class] = (self.sq_norms[class] as f64).sqrt();
        self.abs_bounds[class] += 1;
    }

    fn refresh_norm(&mut self, class: usize) {
        let sq: i128 = self
            .accumulator(class)
            .iter()
            .map(|&a| a as i128 * a as i128)
            .sum();
        self.sq_norms[class] = sq;
        self.norms[class] = (sq as f64).sqrt();
        self.abs_bounds[class] = self
            .accumulator(class)
            .iter()
            .map(|a| a.unsigned_abs() as u64)
            .max()
            .unwrap_or(0);
    }

    fn check_hv(&self, hv: &Hypervector) -> Result<()> {
        if hv.len() != self.hd_dim {
            return Err(Error::contract(format!(
                "hypervector has {} dimensions, model expects {}",
                hv.len(),
                self.hd_dim
            )));
        }
        Ok(())
    }

    fn check_label(&self, label: usize) -> Result<()> {
        if label >= self.num_classes {
            return Err(Error::contract(format!(
                "class {label} out of range for {} classes",
                self.num_classes
            )));
        }
        Ok(())
    }
}

fn loss_of(sims: &[f64], predicted: usize, true_label: usize) -> f64 {
    if predicted == true_label {
        0.0
    } else {
        sims[predicted] - sims[true_label]
    }
}
