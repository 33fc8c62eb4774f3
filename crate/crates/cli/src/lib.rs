//! Command-line driver: configuration loading, stage data I/O and report
//! emission around the `hdseg` pipeline.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use hdseg::config::RunConfig;
use hdseg::data::{self, ClassRemap, GeometricParams, KittiSource};
use hdseg::pipeline::{self, csv_header};
use hdseg::{BufferConfig, BufferMode, ClassModel, Encoder, EncoderParams, Error, LabeledFeatureSet};

/// Buffer ratios swept by `bench`.
pub const BENCH_RATIOS: [f64; 5] = [5.0, 10.0, 20.0, 50.0, 100.0];
/// Retraining epochs used by every `bench` run.
pub const BENCH_EPOCHS: usize = 10;

pub const ENCODER_FILE: &str = "encoder.henc";
pub const MODEL_FILE: &str = "model.hseg";
pub const ADAPTED_FILE: &str = "adapted.hseg";
pub const REPORT_FILE: &str = "adapt_report.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const BENCH_FILE: &str = "bench.csv";
pub const LOSSES_FILE: &str = "losses.csv";

#[derive(Debug, Parser)]
#[command(name = "hdseg", version, about = "Hyperdimensional LiDAR segmentation with buffered adaptation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run configuration file (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Directory for checkpoints, reports and generated data.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,

    /// Override a configuration key; applied after the file, in order.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Worker threads (overrides the `threads` key; 0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write the three synthetic drift stages as feature files.
    Synth,
    /// Train the encoder and class model on the pretrain stage.
    Pretrain,
    /// Adapt the pretrained model on the adapt stage, scoring on test.
    Adapt,
    /// Score a model checkpoint on the test stage.
    Eval,
    /// Sweep buffer ratios and record accuracy and retraining throughput.
    Bench,
}

/// Process exit status for an error: 2 configuration, 3 data or format,
/// 4 broken invariant.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Format(_) | Error::Io { .. } | Error::NoData => 3,
        Error::Contract(_) | Error::Untrained | Error::Uninitialized => 4,
    }
}

/// Runs one command and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn load_config(cli: &Cli) -> hdseg::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> hdseg::Result<()> {
    let cfg = load_config(cli)?;
    cfg.stage_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let ctx = Context {
        cfg,
        out: cli.out.clone(),
        quiet: cli.quiet,
    };
    std::fs::create_dir_all(&ctx.out).map_err(|e| Error::Io {
        path: ctx.out.clone(),
        source: e,
    })?;
    pool.install(|| match cli.command {
        Command::Synth => ctx.synth(),
        Command::Pretrain => ctx.pretrain(),
        Command::Adapt => ctx.adapt(),
        Command::Eval => ctx.eval(),
        Command::Bench => ctx.bench(),
    })
}

struct Context {
    cfg: RunConfig,
    out: PathBuf,
    quiet: bool,
}

fn write(path: &Path, contents: &str) -> hdseg::Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

impl Context {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn stage_path(&self, configured: &Option<PathBuf>, default: &str) -> PathBuf {
        configured.clone().unwrap_or_else(|| self.out.join(default))
    }

    fn kitti_source(&self) -> hdseg::Result<Option<KittiSource>> {
        let Some(path) = &self.cfg.class_remap else {
            return Ok(None);
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        Ok(Some(KittiSource {
            remap: ClassRemap::parse(&text)?,
            geometry: GeometricParams {
                feature_dim: self.cfg.feature_dim,
                sensor_height: self.cfg.sensor_height,
            },
        }))
    }

    fn load(&self, configured: &Option<PathBuf>, default: &str) -> hdseg::Result<LabeledFeatureSet> {
        let path = self.stage_path(configured, default);
        data::load_stage(&path, self.kitti_source()?.as_ref())
    }

    fn encoder(&self) -> hdseg::Result<Encoder> {
        Encoder::new(EncoderParams::load(&self.out.join(ENCODER_FILE))?)
    }

    fn synth(&self) -> hdseg::Result<()> {
        let spec = self.cfg.synth_spec()?;
        let stages = data::generate_synthetic(&spec)?;
        for (name, set) in [
            ("pretrain", &stages.pretrain),
            ("adapt", &stages.adapt),
            ("test", &stages.test),
        ] {
            let dir = self.out.join(name);
            data::save_stage(&dir, set)?;
            self.say(format!(
                "{name}: {} scans, {} points -> {}",
                set.scan_count(),
                set.len(),
                dir.display()
            ));
        }
        Ok(())
    }

    fn pretrain(&self) -> hdseg::Result<()> {
        let stage = self.cfg.stage_config()?;
        let data = self.load(&self.cfg.pretrain_data, "pretrain")?;
        let (encoder, model) = pipeline::pretrain(&stage, &data)?;
        encoder.params().save(&self.out.join(ENCODER_FILE))?;
        model.save(&self.out.join(MODEL_FILE))?;
        let held_in = pipeline::evaluate(&encoder, &model, &data)?;
        self.say(format!(
            "pretrained on {} points; held-in mIoU {:.4}",
            data.len(),
            held_in.miou
        ));
        Ok(())
    }

    fn adapt(&self) -> hdseg::Result<()> {
        let stage = self.cfg.stage_config()?;
        let encoder = self.encoder()?;
        let model = ClassModel::load(&self.out.join(MODEL_FILE))?;
        let stream = self.load(&self.cfg.adapt_data, "adapt")?;
        let test = self.load(&self.cfg.test_data, "test")?;
        let report = pipeline::adapt(&stage, &encoder, model, &stream, &test)?;
        report.final_model.save(&self.out.join(ADAPTED_FILE))?;
        write(&self.out.join(REPORT_FILE), &report.to_csv())?;
        if self.cfg.dump_losses {
            report.losses.write_csv(&self.out.join(LOSSES_FILE))?;
        }
        self.say(format!(
            "adapted over {} epochs; final mIoU {:.4}; {:.2} scans/s",
            report.epoch_records.len(),
            report.final_miou(),
            report.throughput_fps
        ));
        Ok(())
    }

    fn eval(&self) -> hdseg::Result<()> {
        let encoder = self.encoder()?;
        let model_path = self
            .cfg
            .eval_model
            .clone()
            .unwrap_or_else(|| self.out.join(ADAPTED_FILE));
        let model = ClassModel::load(&model_path)?;
        let test = self.load(&self.cfg.test_data, "test")?;
        let record = pipeline::evaluate(&encoder, &model, &test)?;
        let mut csv = csv_header(model.num_classes());
        csv.push_str(&record.csv_row());
        write(&self.out.join(EVAL_FILE), &csv)?;
        self.say(format!(
            "{}: mIoU {:.4} over {} points",
            model_path.display(),
            record.miou,
            record.points_processed
        ));
        Ok(())
    }

    fn bench(&self) -> hdseg::Result<()> {
        let mut stage = self.cfg.stage_config()?;
        stage.retrain_epochs = BENCH_EPOCHS;
        let encoder = self.encoder()?;
        let model = ClassModel::load(&self.out.join(MODEL_FILE))?;
        let stream = self.load(&self.cfg.adapt_data, "adapt")?;
        let test = self.load(&self.cfg.test_data, "test")?;

        let mut csv = String::from("k,final_miou,retrain_fps\n");
        for k in BENCH_RATIOS {
            stage.buffer = BufferMode::Ratio(BufferConfig {
                ratio_percent: k,
                seed: self.cfg.buffer_seed,
                scope: self.cfg.buffer_scope,
            });
            let report = pipeline::adapt(&stage, &encoder, model.clone(), &stream, &test)?;
            let retrain = report.mean_retrain_time().unwrap_or(f64::INFINITY);
            let fps = hdseg::metrics::measure_fps(stream.scan_count(), stream.len(), retrain)
                .map(|t| t.fps)
                .unwrap_or(f64::INFINITY);
            csv.push_str(&format!("{k},{},{fps}\n", report.final_miou()));
            self.say(format!(
                "k={k:>5}%  mIoU {:.4}  retrain {:.4}s/epoch  {:.2} scans/s",
                report.final_miou(),
                retrain,
                fps
            ));
        }
        write(&self.out.join(BENCH_FILE), &csv)
    }
}
