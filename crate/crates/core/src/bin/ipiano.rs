use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ipiano::experiment::{run_experiment, ImageSource, MaskSource, RunConfig};
use ipiano::inpaint::{
    ImageFill, Initialization, DEFAULT_EPSILON, DEFAULT_GAMMA, DEFAULT_KNOWN_FRACTION,
};
use ipiano::solver::DEFAULT_BETA;
use ipiano::trace::{load_trace, relative_curves, save_curves, CurveColumn};
use ipiano::{MonitorLevel, Variant};

/// Ambrosio–Tortorelli inpainting with inertial, variable-metric and
/// block-coordinate proximal methods.
#[derive(Parser, Debug)]
#[command(version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize traces into relative objective curves.
    Curves(CurvesArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mask").args(["mask_file", "mask_fraction"])))]
struct RunArgs {
    /// Input PGM (P5, maxval 255). Without it a synthetic test image is used.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Size of the synthetic image, `WIDTHxHEIGHT`.
    #[arg(long, default_value = "64x64", value_parser = parse_size, conflicts_with = "image")]
    synthetic: (usize, usize),
    /// PGM whose nonzero pixels mark the known pixels.
    #[arg(long)]
    mask_file: Option<PathBuf>,
    /// Share of pixels known, drawn at random with `--seed`.
    #[arg(long)]
    mask_fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Variant name, a comma-separated list, or `all`.
    #[arg(long, default_value = "all")]
    variant: String,
    /// Inertia of the inertial variants.
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Target for γ relative to the Lipschitz estimate.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    alpha_min: f64,
    #[arg(long, value_enum, default_value_t = Monitor::Record)]
    monitor: Monitor,
    /// Reconstructed image. With several variants the variant name is inserted before the extension.
    #[arg(long)]
    out_image: Option<PathBuf>,
    /// Reconstructed edge field.
    #[arg(long)]
    out_edges: Option<PathBuf>,
    /// Certificate trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Relative objective curves of all variants.
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Initial value of the unknown pixels.
    #[arg(long, value_enum, default_value_t = Fill::Mean)]
    init_fill: Fill,
    /// Initial value of the edge field.
    #[arg(long, default_value_t = 0.0)]
    init_edges: f64,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    /// Trace CSV files; curves are named after the file stems.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// Output CSV.
    #[arg(long, short)]
    out: PathBuf,
    /// Common starting value; defaults to each trace's first row.
    #[arg(long)]
    e0: Option<f64>,
    /// Column to normalize.
    #[arg(long, value_enum, default_value_t = Column::H)]
    column: Column,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Monitor {
    Off,
    Record,
    Assert,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Fill {
    Zero,
    Mean,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Column {
    #[value(name = "h")]
    H,
    #[value(name = "H")]
    Lyapunov,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let w = w.parse().map_err(|e| format!("bad width: {e}"))?;
    let h = h.parse().map_err(|e| format!("bad height: {e}"))?;
    Ok((w, h))
}

fn parse_variants(s: &str) -> ipiano::Result<Vec<Variant>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Variant::ALL.to_vec());
    }
    s.split(',').map(|v| v.trim().parse()).collect()
}

fn run(args: RunArgs) -> ipiano::Result<()> {
    let cfg = RunConfig {
        image: match args.image {
            Some(p) => ImageSource::File(p),
            None => ImageSource::Synthetic {
                width: args.synthetic.0,
                height: args.synthetic.1,
            },
        },
        mask: match args.mask_file {
            Some(p) => MaskSource::File(p),
            None => MaskSource::Random {
                fraction: args.mask_fraction.unwrap_or(DEFAULT_KNOWN_FRACTION),
            },
        },
        seed: args.seed,
        gamma: args.gamma,
        epsilon: args.epsilon,
        init: Initialization {
            fill: match args.init_fill {
                Fill::Zero => ImageFill::Zero,
                Fill::Mean => ImageFill::KnownMean,
            },
            edges: args.init_edges,
        },
        variants: parse_variants(&args.variant)?,
        beta: args.beta,
        max_iters: args.iters,
        c: args.c,
        alpha_min: args.alpha_min,
        monitor: match args.monitor {
            Monitor::Off => MonitorLevel::Off,
            Monitor::Record => MonitorLevel::Record,
            Monitor::Assert => MonitorLevel::Assert,
        },
        out_image: args.out_image,
        out_edges: args.out_edges,
        trace: args.trace,
        curves: args.curves,
    };
    let results = run_experiment(&cfg)?;
    println!("variant\tfinal_h\tpath_length\ttail_ratio\tviolations");
    for r in &results {
        println!(
            "{}\t{:.10}\t{:.6}\t{:.4}\t{}",
            r.variant,
            r.final_objective(),
            r.path.total,
            r.path.tail_ratio,
            r.violations
        );
    }
    Ok(())
}

fn curves(args: CurvesArgs) -> ipiano::Result<()> {
    let traces = args
        .traces
        .iter()
        .map(|p| {
            let name = p.file_stem().map_or_else(
                || p.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            );
            Ok((name, load_trace(p)?))
        })
        .collect::<ipiano::Result<Vec<_>>>()?;
    let column = match args.column {
        Column::H => CurveColumn::Objective,
        Column::Lyapunov => CurveColumn::Lyapunov,
    };
    let c = relative_curves(&traces, args.e0, column)?;
    for name in &c.omitted {
        eprintln!("warning: `{name}` has E⁰ = E*, curve omitted");
    }
    save_curves(&args.out, &c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Some(Command::Curves(args)) => curves(args),
        None => run(cli.run),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
