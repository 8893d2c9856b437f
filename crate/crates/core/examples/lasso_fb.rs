//! Forward–backward splitting on a small lasso problem
//! `½‖Mx − y‖² + λ‖x‖₁`, written as `½xᵀQx − bᵀx + λ‖x‖₁` with `Q = MᵀM`.

use ipiano::monitor::{CertificateMonitor, MonitorLevel};
use ipiano::problem::{Block, BlockProblem, DenseQuadratic, L1Norm};
use ipiano::solver::{make_variant, run, VariantConfig};

fn main() -> ipiano::Result<()> {
    let (rows, n) = (8, 5);
    // a fixed, mildly correlated design
    let m: Vec<f64> = (0..rows * n)
        .map(|k| ((k * 7 % 11) as f64 - 5.0) / 5.0 + if k % (n + 1) == 0 { 1.0 } else { 0.0 })
        .collect();
    let truth = [1.5, 0.0, -2.0, 0.0, 0.0];
    let y: Vec<f64> = (0..rows)
        .map(|r| (0..n).map(|j| m[r * n + j] * truth[j]).sum())
        .collect();

    let mut q = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = (0..rows).map(|r| m[r * n + i] * m[r * n + j]).sum();
        }
        b[i] = (0..rows).map(|r| m[r * n + i] * y[r]).sum();
    }

    let problem = BlockProblem::new(
        DenseQuadratic::new(q, b, &[n])?,
        vec![Block::new(n, L1Norm { lambda: 0.1 })],
    )?;
    let cfg = make_variant(
        "fb",
        &VariantConfig {
            max_iters: 2000,
            ..VariantConfig::default()
        },
    )?;
    let mut monitor = CertificateMonitor::new(MonitorLevel::Assert);
    let out = run(&problem, vec![0.0; n], &cfg, &mut monitor)?;

    println!(
        "objective {:.6} -> {:.10}",
        out.initial_objective,
        out.trace.last().unwrap().h
    );
    println!("truth     {truth:?}");
    println!(
        "estimate  {:?}",
        out.x
            .iter()
            .map(|v| (v * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
    println!("{} steps certified", monitor.checked_steps());
    Ok(())
}
