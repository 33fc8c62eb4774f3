//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional and falls
//! back to [`RunConfig::default`]; unknown or repeated keys are errors.
//! `buffer_ratio_percent` takes a number in `(0, 100]` or `full`.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::buffer::{BufferConfig, SelectionScope};
use crate::data::synth::{StageCounts, SyntheticDriftSpec};
use crate::hdc::EncoderParams;
use crate::pipeline::{BufferMode, StageConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub feature_dim: usize,
    pub hd_dim: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub num_classes: usize,
    pub batch_size: usize,
    pub retrain_epochs: usize,
    /// `None` means full-data retraining.
    pub buffer_ratio_percent: Option<f64>,
    pub buffer_seed: u64,
    pub buffer_scope: SelectionScope,
    pub cache_hypervectors: bool,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub pretrain_data: Option<PathBuf>,
    pub adapt_data: Option<PathBuf>,
    pub test_data: Option<PathBuf>,
    pub class_remap: Option<PathBuf>,
    pub eval_model: Option<PathBuf>,
    pub sensor_height: f32,
    pub dump_losses: bool,
    pub synth_seed: u64,
    pub synth_points_per_scan: usize,
    pub synth_scans_pretrain: usize,
    pub synth_scans_adapt: usize,
    pub synth_scans_test: usize,
    pub synth_class_scale: f32,
    pub synth_mean_scale: f32,
    pub synth_drift: f32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            feature_dim: 16,
            hd_dim: 10_000,
            seed: 42,
            epsilon: crate::hdc::DEFAULT_EPSILON,
            num_classes: 6,
            batch_size: 6,
            retrain_epochs: 10,
            buffer_ratio_percent: Some(5.0),
            buffer_seed: 0,
            buffer_scope: SelectionScope::Epoch,
            cache_hypervectors: false,
            threads: 0,
            pretrain_data: None,
            adapt_data: None,
            test_data: None,
            class_remap: None,
            eval_model: None,
            sensor_height: 1.73,
            dump_losses: false,
            synth_seed: 7,
            synth_points_per_scan: 2000,
            synth_scans_pretrain: 20,
            synth_scans_adapt: 20,
            synth_scans_test: 20,
            synth_class_scale: 1.0,
            synth_mean_scale: 4.0,
            synth_drift: 2.0,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

fn path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "feature_dim",
        "hd_dim",
        "seed",
        "epsilon",
        "num_classes",
        "batch_size",
        "retrain_epochs",
        "buffer_ratio_percent",
        "buffer_seed",
        "buffer_scope",
        "cache_hypervectors",
        "threads",
        "pretrain_data",
        "adapt_data",
        "test_data",
        "class_remap",
        "eval_model",
        "sensor_height",
        "dump_losses",
        "synth_seed",
        "synth_points_per_scan",
        "synth_scans_pretrain",
        "synth_scans_adapt",
        "synth_scans_test",
        "synth_class_scale",
        "synth_mean_scale",
        "synth_drift",
    ];

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            cfg.set(key, value.trim())
                .map_err(|e| Error::config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Applies a single `key=value` override of the form given to `--set`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override {assignment:?} is not KEY=VALUE")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "feature_dim" => self.feature_dim = num(key, value)?,
            "hd_dim" => self.hd_dim = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "num_classes" => self.num_classes = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "retrain_epochs" => self.retrain_epochs = num(key, value)?,
            "buffer_ratio_percent" => {
                self.buffer_ratio_percent = match value {
                    "full" => None,
                    v => Some(num(key, v)?),
                }
            }
            "buffer_seed" => self.buffer_seed = num(key, value)?,
            "buffer_scope" => {
                self.buffer_scope = match value {
                    "epoch" => SelectionScope::Epoch,
                    "batch" => SelectionScope::Batch,
                    _ => {
                        return Err(Error::config(format!(
                            "buffer_scope: expected `epoch` or `batch`, got {value:?}"
                        )))
                    }
                }
            }
            "cache_hypervectors" => self.cache_hypervectors = flag(key, value)?,
            "threads" => self.threads = num(key, value)?,
            "pretrain_data" => self.pretrain_data = path(value),
            "adapt_data" => self.adapt_data = path(value),
            "test_data" => self.test_data = path(value),
            "class_remap" => self.class_remap = path(value),
            "eval_model" => self.eval_model = path(value),
            "sensor_height" => self.sensor_height = num(key, value)?,
            "dump_losses" => self.dump_losses = flag(key, value)?,
            "synth_seed" => self.synth_seed = num(key, value)?,
            "synth_points_per_scan" => self.synth_points_per_scan = num(key, value)?,
            "synth_scans_pretrain" => self.synth_scans_pretrain = num(key, value)?,
            "synth_scans_adapt" => self.synth_scans_adapt = num(key, value)?,
            "synth_scans_test" => self.synth_scans_test = num(key, value)?,
            "synth_class_scale" => self.synth_class_scale = num(key, value)?,
            "synth_mean_scale" => self.synth_mean_scale = num(key, value)?,
            "synth_drift" => self.synth_drift = num(key, value)?,
            _ => return Err(Error::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Serializes every key; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let p = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("feature_dim", self.feature_dim.to_string());
        kv("hd_dim", self.hd_dim.to_string());
        kv("seed", self.seed.to_string());
        kv("epsilon", format!("{:e}", self.epsilon));
        kv("num_classes", self.num_classes.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("retrain_epochs", self.retrain_epochs.to_string());
        kv(
            "buffer_ratio_percent",
            self.buffer_ratio_percent
                .map_or("full".to_string(), |k| k.to_string()),
        );
        kv("buffer_seed", self.buffer_seed.to_string());
        kv(
            "buffer_scope",
            match self.buffer_scope {
                SelectionScope::Epoch => "epoch",
                SelectionScope::Batch => "batch",
            }
            .to_string(),
        );
        kv("cache_hypervectors", self.cache_hypervectors.to_string());
        kv("threads", self.threads.to_string());
        kv("pretrain_data", p(&self.pretrain_data));
        kv("adapt_data", p(&self.adapt_data));
        kv("test_data", p(&self.test_data));
        kv("class_remap", p(&self.class_remap));
        kv("eval_model", p(&self.eval_model));
        kv("sensor_height", self.sensor_height.to_string());
        kv("dump_losses", self.dump_losses.to_string());
        kv("synth_seed", self.synth_seed.to_string());
        kv("synth_points_per_scan", self.synth_points_per_scan.to_string());
        kv("synth_scans_pretrain", self.synth_scans_pretrain.to_string());
        kv("synth_scans_adapt", self.synth_scans_adapt.to_string());
        kv("synth_scans_test", self.synth_scans_test.to_string());
        kv("synth_class_scale", self.synth_class_scale.to_string());
        kv("synth_mean_scale", self.synth_mean_scale.to_string());
        kv("synth_drift", self.synth_drift.to_string());
        out
    }

    pub fn encoder_params(&self) -> EncoderParams {
        EncoderParams {
            feature_dim: self.feature_dim,
            hd_dim: self.hd_dim,
            seed: self.seed,
            epsilon: self.epsilon,
        }
    }

    pub fn buffer_mode(&self) -> BufferMode {
        match self.buffer_ratio_percent {
            None => BufferMode::FullData,
            Some(k) => BufferMode::Ratio(BufferConfig {
                ratio_percent: k,
                seed: self.buffer_seed,
                scope: self.buffer_scope,
            }),
        }
    }

    pub fn stage_config(&self) -> Result<StageConfig> {
        let cfg = StageConfig {
            batch_size: self.batch_size,
            retrain_epochs: self.retrain_epochs,
            buffer: self.buffer_mode(),
            encoder: self.encoder_params(),
            num_classes: self.num_classes,
            cache_hypervectors: self.cache_hypervectors,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn synth_spec(&self) -> Result<SyntheticDriftSpec> {
        let mut spec = SyntheticDriftSpec::with_geometry(
            self.num_classes,
            self.feature_dim,
            self.synth_mean_scale,
            self.synth_drift,
            self.synth_seed,
        );
        spec.points_per_scan = self.synth_points_per_scan;
        spec.scans = StageCounts {
            pretrain: self.synth_scans_pretrain,
            adapt: self.synth_scans_adapt,
            test: self.synth_scans_test,
        };
        spec.class_scale = self.synth_class_scale;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let cfg = RunConfig::parse(
            "# run\nhd_dim = 2048\nbuffer_ratio_percent = full  # no buffer\n\
             cache_hypervectors = true\nadapt_data = /tmp/a\nbuffer_scope = batch\n",
        )
        .unwrap();
        assert_eq!(cfg.hd_dim, 2048);
        assert_eq!(cfg.buffer_ratio_percent, None);
        assert!(cfg.cache_hypervectors);
        assert_eq!(cfg.adapt_data, Some(PathBuf::from("/tmp/a")));
        assert_eq!(cfg.buffer_scope, SelectionScope::Batch);
        assert_eq!(cfg.batch_size, 6);
        assert!(matches!(cfg.buffer_mode(), BufferMode::FullData));
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in ["hd_dim 5", "nope = 1", "hd_dim = x", "hd_dim = 1\nhd_dim = 2", "cache_hypervectors = maybe"] {
            assert!(matches!(RunConfig::parse(bad), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let mut cfg = RunConfig::parse("retrain_epochs = 3\n").unwrap();
        cfg.apply_override("retrain_epochs=7").unwrap();
        assert_eq!(cfg.retrain_epochs, 7);
        assert!(cfg.apply_override("retrain_epochs").is_err());
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig {
            test_data: Some("data/test".into()),
            buffer_ratio_percent: Some(12.5),
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.to_text().lines().count(), RunConfig::KEYS.len());
    }

    #[test]
    fn stage_config_validates() {
        let mut cfg = RunConfig {
            buffer_ratio_percent: Some(150.0),
            ..RunConfig::default()
        };
        assert!(cfg.stage_config().is_err());
        cfg.buffer_ratio_percent = Some(5.0);
        cfg.batch_size = 0;
        assert!(cfg.stage_config().is_err());
    }
}
