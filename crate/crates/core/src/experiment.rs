//! Batch inpainting runs: build an instance, run one or more variants, and
//! write images, traces and relative curves.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::inpaint::{
    phantom, random_mask, Grid2D, Initialization, InpaintProblem, DEFAULT_EPSILON, DEFAULT_GAMMA,
};
use crate::monitor::{finite_length, CertificateMonitor, MonitorLevel, PathSummary, TraceRecord};
use crate::pgm::{load_pgm, save_pgm};
use crate::solver::{make_variant, run, Variant, VariantConfig, DEFAULT_BETA};
use crate::trace::{relative_curves, save_curves, save_trace, CurveColumn, RelativeCurves};

#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    File(PathBuf),
    /// The built-in piecewise-constant test image.
    Synthetic {
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaskSource {
    /// A PGM whose nonzero pixels are known.
    File(PathBuf),
    /// `round(fraction · N)` known pixels drawn with the run seed.
    Random { fraction: f64 },
}

/// Everything needed for one batch run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub image: ImageSource,
    pub mask: MaskSource,
    pub seed: u64,
    pub gamma: f64,
    pub epsilon: f64,
    pub init: Initialization,
    pub variants: Vec<Variant>,
    pub beta: f64,
    pub max_iters: usize,
    /// `γ` target relative to the Lipschitz hint; `None` keeps the solver default.
    pub c: Option<f64>,
    pub alpha_min: f64,
    pub monitor: MonitorLevel,
    pub out_image: Option<PathBuf>,
    pub out_edges: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Relative `h` curves of all variants.
    pub curves: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            image: ImageSource::Synthetic {
                width: 64,
                height: 64,
            },
            mask: MaskSource::Random { fraction: 0.1 },
            seed: 0,
            gamma: DEFAULT_GAMMA,
            epsilon: DEFAULT_EPSILON,
            init: Initialization::default(),
            variants: Variant::ALL.to_vec(),
            beta: DEFAULT_BETA,
            max_iters: 1000,
            c: None,
            alpha_min: VariantConfig::default().alpha_min,
            monitor: MonitorLevel::Record,
            out_image: None,
            out_edges: None,
            trace: None,
            curves: None,
        }
    }
}

/// `dir/stem.variant.ext`, used when several variants share one output path.
pub fn variant_path(path: &Path, variant: Variant) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{variant}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{variant}"),
    };
    path.with_file_name(name)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::InvalidConfig("no variant selected".into()));
        }
        if let MaskSource::Random { fraction } = self.mask {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "mask fraction {fraction} must lie in (0, 1]"
                )));
            }
        }
        if let ImageSource::Synthetic { width, height } = self.image {
            if width == 0 || height == 0 {
                return Err(Error::InvalidConfig(
                    "synthetic image must be non-empty".into(),
                ));
            }
        }
        let mut seen = HashSet::new();
        for p in self.output_paths() {
            if !seen.insert(p.clone()) {
                return Err(Error::InvalidConfig(format!(
                    "output path {} used twice",
                    p.display()
                )));
            }
        }
        for v in &self.variants {
            self.solver_config(*v)?.validate()?;
        }
        Ok(())
    }

    /// The solver configuration of one variant.
    pub fn solver_config(&self, variant: Variant) -> Result<VariantConfig> {
        let mut base = VariantConfig {
            beta: self.beta,
            max_iters: self.max_iters,
            seed: self.seed,
            alpha_min: self.alpha_min,
            ..VariantConfig::default()
        };
        if let Some(c) = self.c {
            base.c = c;
        }
        make_variant(variant.name(), &base)
    }

    fn resolve(&self, path: &Option<PathBuf>, variant: Variant) -> Option<PathBuf> {
        let p = path.as_ref()?;
        Some(if self.variants.len() > 1 {
            variant_path(p, variant)
        } else {
            p.clone()
        })
    }

    fn output_paths(&self) -> Vec<PathBuf> {
        let mut out: Vec<PathBuf> = self
            .variants
            .iter()
            .flat_map(|v| {
                [&self.out_image, &self.out_edges, &self.trace]
                    .into_iter()
                    .filter_map(move |p| self.resolve(p, *v))
            })
            .collect();
        out.extend(self.curves.clone());
        out
    }

    /// Loads or generates the image and mask.
    pub fn instance(&self) -> Result<InpaintProblem> {
        let image = match &self.image {
            ImageSource::File(p) => load_pgm(p)?,
            ImageSource::Synthetic { width, height } => phantom(*width, *height),
        };
        let mask = match &self.mask {
            MaskSource::File(p) => {
                let m = load_pgm(p)?;
                let data = m
                    .data()
                    .iter()
                    .map(|v| if *v > 0.0 { 1.0 } else { 0.0 })
                    .collect();
                Grid2D::new(m.width(), m.height(), data)?
            }
            MaskSource::Random { fraction } => {
                random_mask(image.width(), image.height(), *fraction, self.seed)?
            }
        };
        InpaintProblem::new(image, mask, self.gamma, self.epsilon)
    }
}

/// Outcome of one variant.
#[derive(Debug, Clone)]
pub struct VariantResult {
    pub variant: Variant,
    pub image: Grid2D,
    pub edges: Grid2D,
    pub initial_objective: f64,
    pub trace: Vec<TraceRecord>,
    pub path: PathSummary,
    /// Certificate violations recorded by the monitor.
    pub violations: usize,
    /// Steps that could not use the fresh metric.
    pub fallbacks: usize,
    pub backtracks: usize,
}

impl VariantResult {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(self.initial_objective, |r| r.h)
    }
}

/// Runs one variant on an instance.
pub fn run_variant(
    problem: &InpaintProblem,
    cfg: &RunConfig,
    variant: Variant,
) -> Result<VariantResult> {
    let solver_cfg = cfg.solver_config(variant)?;
    let bp = problem.block_problem();
    let mut monitor = CertificateMonitor::new(cfg.monitor);
    let out = run(
        &bp,
        problem.initial_point_with(&cfg.init),
        &solver_cfg,
        &mut monitor,
    )?;
    let (image, edges) = problem.split(&out.x)?;
    Ok(VariantResult {
        variant,
        image,
        edges,
        initial_objective: out.initial_objective,
        path: finite_length(&out.trace),
        trace: out.trace,
        violations: monitor.violations().len(),
        fallbacks: out.fallbacks,
        backtracks: out.backtracks,
    })
}

/// Runs all configured variants in parallel threads and writes the requested
/// artifacts. Results come back in the order of `cfg.variants`.
pub fn run_experiment(cfg: &RunConfig) -> Result<Vec<VariantResult>> {
    cfg.validate()?;
    let problem = cfg.instance()?;
    let outcomes: Vec<Result<VariantResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .variants
            .iter()
            .map(|&v| {
                let problem = &problem;
                s.spawn(move || {
                    let r = run_variant(problem, cfg, v).map_err(|e| annotate(v, e))?;
                    write_artifacts(cfg, &r)?;
                    Ok(r)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("variant thread panicked"))
            .collect()
    });
    let results = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    if let Some(path) = &cfg.curves {
        let curves = curves_of(&results)?;
        save_curves(path, &curves)?;
    }
    Ok(results)
}

fn annotate(variant: Variant, e: Error) -> Error {
    match e {
        Error::Certificate { iteration, detail } => Error::Certificate {
            iteration,
            detail: format!("{variant}: {detail}"),
        },
        other => other,
    }
}

fn write_artifacts(cfg: &RunConfig, r: &VariantResult) -> Result<()> {
    if let Some(p) = cfg.resolve(&cfg.out_image, r.variant) {
        save_pgm(p, &r.image)?;
    }
    if let Some(p) = cfg.resolve(&cfg.out_edges, r.variant) {
        save_pgm(p, &r.edges)?;
    }
    if let Some(p) = cfg.resolve(&cfg.trace, r.variant) {
        save_trace(p, &r.trace)?;
    }
    Ok(())
}

/// Relative `h` curves normalized by the common starting objective.
pub fn curves_of(results: &[VariantResult]) -> Result<RelativeCurves> {
    let named: Vec<(String, Vec<TraceRecord>)> = results
        .iter()
        .map(|r| (r.variant.name().to_string(), r.trace.clone()))
        .collect();
    let e0 = results.first().map(|r| r.initial_objective);
    relative_curves(&named, e0, CurveColumn::Objective)
}
