//! Inertial steps on a nonconvex sparse regression `½‖x − t‖²_Q + λ‖x‖₀`.
//! The ℓ₀ penalty is not semi-convex, so the step sizes fall back to the
//! general rule, and the certificates still hold at every step.

use ipiano::monitor::{finite_length, CertificateMonitor, MonitorLevel};
use ipiano::problem::{Block, BlockProblem, DenseQuadratic, L0Penalty};
use ipiano::solver::{make_variant, run, VariantConfig};

fn main() -> ipiano::Result<()> {
    let n = 6;
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 2.0 + i as f64;
        if i + 1 < n {
            q[i * n + i + 1] = -0.8;
            q[(i + 1) * n + i] = -0.8;
        }
    }
    let target = [2.0, 0.05, -1.0, 0.02, 0.0, 1.5];
    let b: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| q[i * n + j] * target[j]).sum())
        .collect();
    let problem = BlockProblem::new(
        DenseQuadratic::new(q, b, &[n])?,
        vec![Block::new(n, L0Penalty { lambda: 0.05 })],
    )?;

    // without semi-convexity, inertia must stay below ½
    for (name, beta) in [("fb", 0.0), ("ipiano", 0.2), ("ipiano", 0.4)] {
        let cfg = make_variant(
            name,
            &VariantConfig {
                beta,
                max_iters: 300,
                ..VariantConfig::default()
            },
        )?;
        let mut monitor = CertificateMonitor::new(MonitorLevel::Assert);
        let out = run(&problem, vec![1.0; n], &cfg, &mut monitor)?;
        let path = finite_length(&out.trace);
        println!(
            "{name:<8} β = {beta:.1}  α = {:.4}  h = {:.8}  support = {:?}  path = {:.4}",
            out.trace[0].alpha,
            out.trace.last().unwrap().h,
            out.x
                .iter()
                .map(|v| usize::from(*v != 0.0))
                .collect::<Vec<_>>(),
            path.total
        );
    }
    Ok(())
}
