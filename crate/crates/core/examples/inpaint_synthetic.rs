//! Inpaints the built-in test image from 10% of its pixels with all eight
//! variants and prints a summary table.
//!
//! cargo run --release --example inpaint_synthetic -- [size] [iterations] [out_dir]

use std::path::PathBuf;
use std::time::Instant;

use ipiano::experiment::{run_experiment, ImageSource, RunConfig};
use ipiano::MonitorLevel;

fn main() -> ipiano::Result<()> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(64);
    let iters: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let out_dir = args.next().map(PathBuf::from);

    let mut cfg = RunConfig {
        image: ImageSource::Synthetic {
            width: size,
            height: size,
        },
        max_iters: iters,
        monitor: MonitorLevel::Record,
        ..RunConfig::default()
    };
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir).map_err(|source| ipiano::Error::Io {
            path: dir.clone(),
            source,
        })?;
        cfg.out_image = Some(dir.join("w.pgm"));
        cfg.out_edges = Some(dir.join("z.pgm"));
        cfg.trace = Some(dir.join("trace.csv"));
        cfg.curves = Some(dir.join("curves.csv"));
    }

    let start = Instant::now();
    let results = run_experiment(&cfg)?;
    println!("{size}×{size}, {iters} iterations, {:.2?}", start.elapsed());
    println!(
        "{:<14}{:>22}{:>14}{:>10}{:>12}{:>11}{:>12}",
        "variant", "final h", "path", "tail", "violations", "fallbacks", "backtracks"
    );
    for r in &results {
        println!(
            "{:<14}{:>22.12}{:>14.6}{:>10.4}{:>12}{:>11}{:>12}",
            r.variant.name(),
            r.final_objective(),
            r.path.total,
            r.path.tail_ratio,
            r.violations,
            r.fallbacks,
            r.backtracks
        );
    }
    Ok(())
}
