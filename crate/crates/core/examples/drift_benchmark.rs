//! Runs the synthetic drift benchmark end to end and prints the mIoU of the
//! pretrained model, the full-data adapted model and a 5% buffer model.
//!
//! `cargo run --release -p hdseg --example drift_benchmark [hd_dim] [seed] [mean_scale]`

use std::time::Instant;

use hdseg::data::{generate_synthetic, SyntheticDriftSpec};
use hdseg::pipeline::{adapt, evaluate, pretrain};
use hdseg::{BufferConfig, BufferMode, EncoderParams, StageConfig};

fn main() -> hdseg::Result<()> {
    let mut args = std::env::args().skip(1);
    let hd_dim = args.next().and_then(|a| a.parse().ok()).unwrap_or(2048);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let mean_scale = args.next().and_then(|a| a.parse().ok()).unwrap_or(4.0);
    let spec = SyntheticDriftSpec::with_geometry(6, 16, mean_scale, 2.0, seed);
    let stages = generate_synthetic(&spec)?;
    let mut cfg = StageConfig::new(EncoderParams::new(spec.feature_dim, hd_dim, 42), spec.num_classes);

    let t = Instant::now();
    let (encoder, model) = pretrain(&cfg, &stages.pretrain)?;
    println!("pretrain: {:.2}s", t.elapsed().as_secs_f64());
    println!("  held-in mIoU {:.4}", evaluate(&encoder, &model, &stages.pretrain)?.miou);
    println!("  test mIoU    {:.4}", evaluate(&encoder, &model, &stages.test)?.miou);

    for (name, mode) in [
        ("full", BufferMode::FullData),
        ("k=5", BufferMode::Ratio(BufferConfig::new(5.0, 0))),
    ] {
        cfg.buffer = mode;
        let t = Instant::now();
        let report = adapt(&cfg, &encoder, model.clone(), &stages.adapt, &stages.test)?;
        println!("adapt {name}: {:.2}s", t.elapsed().as_secs_f64());
        for r in &report.epoch_records {
            println!(
                "  epoch {:2} miou {:.4} points {:6} train {:.3}s",
                r.epoch, r.miou, r.points_processed, r.wall_time
            );
        }
    }
    Ok(())
}
