//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ipiano::experiment::{run_experiment, ImageSource, RunConfig, VariantResult};
use ipiano::inpaint::{
    dx_adjoint, dx_forward, dy_adjoint, dy_forward, lipschitz_z, metric_w, metric_z, phantom,
    prox_mask, prox_quad_z, random_mask, AtCoupling, Grid2D, ImageFill, Initialization,
    InpaintProblem, WeightedDiffusion, DEFAULT_EPSILON, DEFAULT_GAMMA,
};
use ipiano::metric::DiagonalMetric;
use ipiano::monitor::{CertificateKind, CertificateMonitor, MonitorLevel};
use ipiano::problem::{Block, BlockProblem, MaskedEquality, SmoothTerm};
use ipiano::solver::{make_variant, run, Variant, VariantConfig};
use ipiano::stepsize::{delta_gamma, feasible_alpha};
use ipiano::trace::{relative_curves, CurveColumn};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn synthetic_64(iters: usize) -> RunConfig {
    RunConfig {
        image: ImageSource::Synthetic {
            width: 64,
            height: 64,
        },
        max_iters: iters,
        monitor: MonitorLevel::Record,
        ..RunConfig::default()
    }
}

fn run_all(iters: usize) -> Vec<VariantResult> {
    run_experiment(&synthetic_64(iters)).expect("experiment runs")
}

/// Descent and relative-error certificates for every variant and iteration.
fn certificates() -> Outcome {
    let cfg = synthetic_64(300);
    let problem = cfg.instance().unwrap();
    let bp = problem.block_problem();
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for v in Variant::ALL {
        let solver_cfg = cfg.solver_config(v).unwrap();
        let mut monitor = CertificateMonitor::new(MonitorLevel::Record);
        run(
            &bp,
            problem.initial_point_with(&cfg.init),
            &solver_cfg,
            &mut monitor,
        )
        .unwrap();
        checked += monitor.checked_steps();
        let mut by_kind: BTreeMap<String, usize> = BTreeMap::new();
        for violation in monitor.violations() {
            let group = match violation.kind {
                CertificateKind::Descent | CertificateKind::Pairing => "descent",
                CertificateKind::RelativeError => "relative error",
                _ => "parameters",
            };
            *by_kind.entry(group.to_string()).or_default() += 1;
        }
        if !by_kind.is_empty() || monitor.checked_steps() != 300 {
            failures.push(format!("{v}: {by_kind:?}"));
        }
    }
    let elapsed = start.elapsed();
    let passed = failures.is_empty() && elapsed.as_secs_f64() < 30.0;
    outcome(
        passed,
        format!(
            "{checked} steps over 8 variants, violations: {}, {:.1?}",
            if failures.is_empty() {
                "none".into()
            } else {
                failures.join("; ")
            },
            elapsed
        ),
    )
}

/// Closed-form Lipschitz constants of the two blocks.
fn metric_constants() -> Outcome {
    let (gamma, epsilon) = (DEFAULT_GAMMA, DEFAULT_EPSILON);
    let max_w = metric_w(&Grid2D::filled(64, 64, 1.0))
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = lipschitz_z(gamma, epsilon);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut max_z = f64::NEG_INFINITY;
    let mut grids: Vec<Grid2D> = (0..20)
        .map(|_| Grid2D::new(32, 32, (0..1024).map(|_| rng.random::<f64>()).collect()).unwrap())
        .collect();
    // the worst case: a 0/1 checkerboard
    grids.push(
        Grid2D::new(
            32,
            32,
            (0..1024).map(|p| ((p / 32 + p % 32) % 2) as f64).collect(),
        )
        .unwrap(),
    );
    for w in &grids {
        max_z = metric_z(w, gamma, epsilon)
            .into_iter()
            .fold(max_z, f64::max);
    }
    outcome(
        max_w == 8.0 && max_z <= bound,
        format!("max metric_w = {max_w}, max metric_z = {max_z} ≤ {bound}"),
    )
}

fn at_value_grad(w: &Grid2D, z: &Grid2D, gamma: f64, epsilon: f64) -> (Vec<f64>, Vec<f64>) {
    // straightforward per-pixel loops, independent of the library stencils
    let (width, height) = (w.width(), w.height());
    let idx = |r: usize, c: usize| c * height + r;
    let ge = gamma * epsilon;
    let mut gw = vec![0.0; width * height];
    let mut gz = vec![0.0; width * height];
    for c in 0..width {
        for r in 0..height {
            let p = idx(r, c);
            let zp2 = z.get(r, c) * z.get(r, c);
            let mut edges = Vec::new();
            if c + 1 < width {
                edges.push(idx(r, c + 1));
            }
            if r + 1 < height {
                edges.push(idx(r + 1, c));
            }
            for q in edges {
                let dw = w.data()[q] - w.data()[p];
                let dz = z.data()[q] - z.data()[p];
                // ½ z_p² dw²
                gw[q] += zp2 * dw;
                gw[p] -= zp2 * dw;
                gz[p] += z.data()[p] * dw * dw;
                // ½ γε dz²
                gz[q] += ge * dz;
                gz[p] -= ge * dz;
            }
        }
    }
    (gw, gz)
}

fn at_reference_objective(
    w: &[f64],
    z: &[f64],
    image: &Grid2D,
    mask: &Grid2D,
    gamma: f64,
    epsilon: f64,
) -> f64 {
    let (width, height) = (image.width(), image.height());
    let (image, mask) = (image.data(), mask.data());
    let idx = |r: usize, c: usize| c * height + r;
    let mut total = 0.0;
    for c in 0..width {
        for r in 0..height {
            let p = idx(r, c);
            for q in [
                (c + 1 < width).then(|| idx(r, c + 1)),
                (r + 1 < height).then(|| idx(r + 1, c)),
            ]
            .into_iter()
            .flatten()
            {
                total += 0.5 * z[p] * z[p] * (w[q] - w[p]).powi(2);
                total += 0.5 * gamma * epsilon * (z[q] - z[p]).powi(2);
            }
            total += gamma / (4.0 * epsilon) * (z[p] - 1.0).powi(2);
            if mask[p] == 1.0 && w[p] != image[p] {
                return f64::INFINITY;
            }
        }
    }
    total
}

/// Single-block equivalence and agreement with a hand-written FB / PALM.
fn reduction_equivalence() -> Outcome {
    let (width, height) = (8, 8);
    let image = phantom(width, height);
    let mask = random_mask(width, height, 0.25, 4).unwrap();
    let mut notes = Vec::new();
    let mut passed = true;

    // J = 1: linear diffusion inpainting on w alone
    let single = BlockProblem::new(
        WeightedDiffusion::linear(width, height),
        vec![Block::new(
            width * height,
            MaskedEquality::new(
                image.data().to_vec(),
                mask.data().iter().map(|m| *m == 1.0).collect(),
            )
            .unwrap(),
        )],
    )
    .unwrap();
    let x0: Vec<f64> = image
        .data()
        .iter()
        .zip(mask.data())
        .map(|(i, m)| i * m)
        .collect();
    for (joint, block) in [("vm-ipiano", "bc-vm-ipiano"), ("fb", "bc-fb")] {
        let base = VariantConfig {
            max_iters: 50,
            ..VariantConfig::default()
        };
        let a = run(
            &single,
            x0.clone(),
            &make_variant(joint, &base).unwrap(),
            &mut CertificateMonitor::default(),
        )
        .unwrap();
        let b = run(
            &single,
            x0.clone(),
            &make_variant(block, &base).unwrap(),
            &mut CertificateMonitor::default(),
        )
        .unwrap();
        let same_x =
            a.x.iter()
                .zip(&b.x)
                .all(|(p, q)| p.to_bits() == q.to_bits());
        let same_trace = a.trace == b.trace;
        passed &= same_x && same_trace;
        notes.push(format!("{block} ≡ {joint}: {}", same_x && same_trace));
    }

    // β = 0, identity metric on the full two-block model
    let (gamma, epsilon) = (DEFAULT_GAMMA, DEFAULT_EPSILON);
    let problem = InpaintProblem::new(image.clone(), mask.clone(), gamma, epsilon).unwrap();
    let bp = problem.block_problem();
    let init = Initialization {
        fill: ImageFill::KnownMean,
        edges: 1.0,
    };
    let x0 = problem.initial_point_with(&init);
    let n = width * height;
    let kappa = gamma / (2.0 * epsilon);
    let base = VariantConfig {
        max_iters: 50,
        ..VariantConfig::default()
    };
    let rel_c = base.c;
    let l_w: f64 = 8.0;
    let l_z = 2.0 + 8.0 * gamma * epsilon;
    let mut worst: f64 = 0.0;
    for name in ["fb", "bc-fb"] {
        let cfg = make_variant(name, &base).unwrap();
        let out = run(&bp, x0.clone(), &cfg, &mut CertificateMonitor::default()).unwrap();
        let no_backtracking = out.backtracks == 0;

        let mut w: Vec<f64> = x0[..n].to_vec();
        let mut z: Vec<f64> = x0[n..].to_vec();
        let mut max_dev: f64 = 0.0;
        for k in 0..50 {
            let wg = Grid2D::new(width, height, w.clone()).unwrap();
            let zg = Grid2D::new(width, height, z.clone()).unwrap();
            let (gw, gz) = at_value_grad(&wg, &zg, gamma, epsilon);
            let step_w = |alpha: f64, gw: &[f64], w: &mut Vec<f64>| {
                for p in 0..n {
                    w[p] = if mask.data()[p] == 1.0 {
                        image.data()[p]
                    } else {
                        w[p] - alpha * gw[p]
                    };
                }
            };
            let step_z = |alpha: f64, gz: &[f64], z: &mut Vec<f64>| {
                for p in 0..n {
                    z[p] = (kappa + z[p] / alpha - gz[p]) / (kappa + 1.0 / alpha);
                }
            };
            if name == "fb" {
                // one step on (w, z) with α = 2/(L + 2c), c relative to max(L_w, L_z)
                let l = l_w.max(l_z);
                let alpha = 2.0 / (l + 2.0 * rel_c * l);
                step_w(alpha, &gw, &mut w);
                step_z(alpha, &gz, &mut z);
            } else if k % 2 == 0 {
                step_w(2.0 / (l_w + 2.0 * rel_c * l_w), &gw, &mut w);
            } else {
                // g₂ is κ-strongly convex, which enlarges the admissible z step
                step_z(2.0 / (l_z - kappa + 2.0 * rel_c * l_z), &gz, &mut z);
            }
        }
        for (p, v) in w.iter().chain(&z).enumerate() {
            max_dev = max_dev.max((v - out.x[p]).abs());
        }
        worst = worst.max(max_dev);
        passed &= max_dev <= 1e-12 && no_backtracking;
        notes.push(format!("{name} vs reference: max |Δ| = {max_dev:.1e}"));
    }
    outcome(passed && worst <= 1e-12, notes.join(", "))
}

/// Root of a strictly increasing scalar function by bisection.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gradients vs finite differences, prox vs numeric minimization, adjoints.
fn oracles() -> Outcome {
    let (gamma, epsilon) = (DEFAULT_GAMMA, DEFAULT_EPSILON);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (width, height) = (6, 6);
    let n = width * height;
    let mut worst_grad: f64 = 0.0;
    let mut worst_ref: f64 = 0.0;
    for _ in 0..20 {
        let image = Grid2D::new(width, height, (0..n).map(|_| rng.random()).collect()).unwrap();
        let mask = Grid2D::filled(width, height, 0.0);
        let w: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-0.2..1.2)).collect();
        let f = AtCoupling::new(width, height, gamma, epsilon);
        let mut x = w.clone();
        x.extend(&z);
        let analytic: Vec<f64> = [f.block_gradient(&x, 0), f.block_gradient(&x, 1)].concat();
        let h = 1e-6;
        for i in 0..2 * n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            let err = (fd - analytic[i]).abs() / analytic[i].abs().max(1e-3);
            worst_grad = worst_grad.max(err);
        }
        // the library objective against an independent loop version
        let p = InpaintProblem::new(image.clone(), mask.clone(), gamma, epsilon).unwrap();
        let lib = p
            .at_objective(
                &Grid2D::new(width, height, w.clone()).unwrap(),
                &Grid2D::new(width, height, z.clone()).unwrap(),
            )
            .unwrap();
        let reference = at_reference_objective(&w, &z, &image, &mask, gamma, epsilon);
        worst_ref = worst_ref.max((lib - reference).abs() / reference.abs().max(1.0));
        let (gw, gz) = at_value_grad(
            &Grid2D::new(width, height, w).unwrap(),
            &Grid2D::new(width, height, z).unwrap(),
            gamma,
            epsilon,
        );
        for (a, b) in analytic.iter().zip(gw.iter().chain(&gz)) {
            worst_ref = worst_ref.max((a - b).abs());
        }
    }

    let mut worst_prox: f64 = 0.0;
    let kappa = gamma / (2.0 * epsilon);
    for _ in 0..20 {
        let image = Grid2D::new(width, height, (0..n).map(|_| rng.random()).collect()).unwrap();
        let mask = Grid2D::new(
            width,
            height,
            (0..n).map(|_| f64::from(rng.random_bool(0.3))).collect(),
        )
        .unwrap();
        let metric =
            DiagonalMetric::new((0..n).map(|_| rng.random_range(0.01..=1.0)).collect()).unwrap();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let alpha = rng.random_range(0.01..2.0);
        let pw = prox_mask(&image, &mask, &v, &y, alpha, &metric).unwrap();
        let pz = prox_quad_z(gamma, epsilon, &v, &y, alpha, &metric).unwrap();
        for i in 0..n {
            let a = metric.entries()[i];
            let ow = if mask.data()[i] == 1.0 {
                image.data()[i]
            } else {
                bisect(|t| v[i] + a / alpha * (t - y[i]), -1e4, 1e4)
            };
            let oz = bisect(
                |t| kappa * (t - 1.0) + v[i] + a / alpha * (t - y[i]),
                -1e4,
                1e4,
            );
            worst_prox = worst_prox
                .max((pw.data()[i] - ow).abs())
                .max((pz[i] - oz).abs());
        }
    }

    let mut worst_adj: f64 = 0.0;
    for (w, h) in [(1, 1), (6, 6), (9, 4), (3, 11)] {
        let u = Grid2D::new(
            w,
            h,
            (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let v = Grid2D::new(
            w,
            h,
            (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let dot = |a: &Grid2D, b: &Grid2D| {
            a.data()
                .iter()
                .zip(b.data())
                .map(|(p, q)| p * q)
                .sum::<f64>()
        };
        worst_adj = worst_adj
            .max((dot(&dx_forward(&u), &v) - dot(&u, &dx_adjoint(&v))).abs())
            .max((dot(&dy_forward(&u), &v) - dot(&u, &dy_adjoint(&v))).abs());
    }
    outcome(
        worst_grad <= 1e-6 && worst_prox <= 1e-9 && worst_adj <= 1e-12 && worst_ref <= 1e-12,
        format!(
            "gradient rel. err {worst_grad:.1e}, independent model {worst_ref:.1e}, prox {worst_prox:.1e}, adjoint {worst_adj:.1e}"
        ),
    )
}

/// `feasible_alpha` followed by `delta_gamma` returns `γ = c`.
fn step_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    let mut rejected_ok = 0;
    let mut bad_reject = 0;
    for _ in 0..1000 {
        let semiconvex = rng.random_bool(0.5);
        let s = if semiconvex { 1.0 } else { 0.0 };
        let l = rng.random_range(1e-3..1e3);
        let m = if semiconvex {
            rng.random_range(0.0..l) * rng.random::<f64>()
        } else {
            0.0
        };
        let c = rng.random_range(1e-6..10.0);
        let beta_max = 0.5 * (1.0 + s);
        let beta = rng.random_range(0.0..beta_max);
        let alpha = feasible_alpha(beta, l, semiconvex, m, c).unwrap();
        let (_, gamma) = delta_gamma(alpha, beta, l, semiconvex, m);
        // δ and γ are differences, so rounding is relative to their operands
        let scale = 0.5 * ((1.0 + s - beta) / alpha + l + s * m) + beta / (2.0 * alpha);
        worst = worst.max((gamma - c).abs() / scale);
        accepted += 1;

        let bad_beta = rng.random_range(beta_max..1.5);
        if feasible_alpha(bad_beta, l, semiconvex, m, c).is_err() {
            rejected_ok += 1;
        } else {
            bad_reject += 1;
        }
    }
    outcome(
        worst <= 8.0 * f64::EPSILON && bad_reject == 0,
        format!(
            "{accepted} draws, max |γ − c| / scale = {:.2} ulp, {rejected_ok}/1000 invalid β rejected",
            worst / f64::EPSILON
        ),
    )
}

fn final_h(results: &[VariantResult], v: Variant) -> f64 {
    results
        .iter()
        .find(|r| r.variant == v)
        .unwrap()
        .final_objective()
}

/// Variable metric helps, and the Lyapunov curves never increase.
fn qualitative(results: &[VariantResult]) -> Outcome {
    let pairs = [
        (Variant::VmIpiano, Variant::Ipiano),
        (Variant::BcVmIpiano, Variant::BcIpiano),
    ];
    let mut passed = true;
    let mut notes = Vec::new();
    for (vm, plain) in pairs {
        let (a, b) = (final_h(results, vm), final_h(results, plain));
        passed &= a <= b;
        notes.push(format!("{vm} {a:.6} vs {plain} {b:.6}"));
    }
    let named: Vec<(String, Vec<_>)> = results
        .iter()
        .map(|r| (r.variant.to_string(), r.trace.clone()))
        .collect();
    let curves = relative_curves(
        &named,
        Some(results[0].initial_objective),
        CurveColumn::Lyapunov,
    )
    .unwrap();
    let monotone = curves.omitted.is_empty()
        && curves
            .curves
            .iter()
            .all(|(_, c)| c.windows(2).all(|w| w[1] <= w[0]) && c[0] <= 1.0);
    passed &= monotone;
    notes.push(format!("H curves monotone: {monotone}"));
    outcome(passed, notes.join(", "))
}

fn finite_length(results: &[VariantResult]) -> Outcome {
    let worst = results
        .iter()
        .map(|r| (r.variant, r.path.tail_ratio, r.path.total))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let finite = results.iter().all(|r| r.path.total.is_finite());
    outcome(
        finite && worst.1 < 0.25,
        format!(
            "largest tail ratio {:.4} ({}, path length {:.3})",
            worst.1, worst.0, worst.2
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

/// Identical seeds give byte-identical artifacts.
fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let cfg = RunConfig {
            image: ImageSource::Synthetic {
                width: 24,
                height: 24,
            },
            max_iters: 60,
            seed: 9,
            out_image: Some(dir.path().join("w.pgm")),
            out_edges: Some(dir.path().join("z.pgm")),
            trace: Some(dir.path().join("trace.csv")),
            curves: Some(dir.path().join("curves.csv")),
            ..RunConfig::default()
        };
        run_experiment(&cfg).unwrap();
    }
    let a = read_dir_bytes(dirs[0].path());
    let b = read_dir_bytes(dirs[1].path());
    outcome(
        a == b && a.len() == 25,
        format!("{} files compared", a.len()),
    )
}

fn main() {
    let start = Instant::now();
    let long = run_all(1000);
    let criteria: Vec<(&str, Outcome)> = vec![
        ("certificate suite", certificates()),
        ("closed-form metric constants", metric_constants()),
        ("reduction equivalence", reduction_equivalence()),
        ("oracle checks", oracles()),
        ("step-size algebra", step_algebra()),
        ("variable metric vs constant metric", qualitative(&long)),
        ("finite length", finite_length(&long)),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in criteria.iter().enumerate() {
        println!(
            "{} criterion {}: {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        criteria.len() - failed,
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
