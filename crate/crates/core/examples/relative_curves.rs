//! Runs every variant on a small inpainting instance, writes the traces,
//! reads them back and prints relative objective curves
//! `(Eⁿ − E*)/(E⁰ − E*)` at a few iterations.

use ipiano::experiment::{run_experiment, ImageSource, RunConfig};
use ipiano::trace::{load_trace, relative_curves, CurveColumn};

fn main() -> ipiano::Result<()> {
    let dir = std::env::temp_dir().join("ipiano-relative-curves");
    std::fs::create_dir_all(&dir).map_err(|source| ipiano::Error::Io {
        path: dir.clone(),
        source,
    })?;
    let cfg = RunConfig {
        image: ImageSource::Synthetic {
            width: 32,
            height: 32,
        },
        max_iters: 400,
        trace: Some(dir.join("trace.csv")),
        curves: Some(dir.join("curves.csv")),
        ..RunConfig::default()
    };
    let results = run_experiment(&cfg)?;
    let e0 = results[0].initial_objective;

    let mut traces = Vec::new();
    for v in &cfg.variants {
        let path = ipiano::experiment::variant_path(cfg.trace.as_ref().unwrap(), *v);
        traces.push((v.name().to_string(), load_trace(path)?));
    }
    let curves = relative_curves(&traces, Some(e0), CurveColumn::Objective)?;
    println!("E⁰ = {e0:.6}, E* = {:.10}", curves.e_star);
    println!(
        "{:<14}{:>12}{:>12}{:>12}{:>12}",
        "variant", "n=10", "n=50", "n=100", "n=400"
    );
    for (name, c) in &curves.curves {
        println!(
            "{name:<14}{:>12.3e}{:>12.3e}{:>12.3e}{:>12.3e}",
            c[9], c[49], c[99], c[399]
        );
    }
    println!("curves written to {}", dir.join("curves.csv").display());
    Ok(())
}
