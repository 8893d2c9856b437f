//! A badly scaled, coupled quadratic where a diagonal metric pays off:
//! constant steps are limited by the stiffest coordinates, while the metric
//! rescales each coordinate by its own curvature.

use ipiano::monitor::{CertificateMonitor, MonitorLevel};
use ipiano::problem::{Block, BlockProblem, DenseQuadratic, L1Norm};
use ipiano::solver::{make_variant, run, VariantConfig};

fn main() -> ipiano::Result<()> {
    // Q = S K S with K a 1-D Laplacian chain and S spanning two decades
    let n = 12;
    let s: Vec<f64> = (0..n).map(|i| 10f64.powf((i % 4) as f64 / 1.5)).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 2.05 * s[i] * s[i];
        if i + 1 < n {
            q[i * n + i + 1] = -s[i] * s[i + 1];
            q[(i + 1) * n + i] = -s[i] * s[i + 1];
        }
    }
    let b: Vec<f64> = (0..n).map(|i| s[i] * (1.0 + (i % 3) as f64)).collect();
    let problem = BlockProblem::new(
        DenseQuadratic::new(q, b, &[n])?,
        vec![Block::new(n, L1Norm { lambda: 0.01 })],
    )?;

    println!(
        "{:<10}{:>16}{:>16}{:>16}{:>16}",
        "variant", "n=10", "n=50", "n=200", "n=500"
    );
    for name in ["fb", "vm-fb", "ipiano", "vm-ipiano"] {
        let cfg = make_variant(
            name,
            &VariantConfig {
                max_iters: 500,
                ..VariantConfig::default()
            },
        )?;
        let mut monitor = CertificateMonitor::new(MonitorLevel::Assert);
        let out = run(&problem, vec![0.0; n], &cfg, &mut monitor)?;
        let h: Vec<f64> = out.trace.iter().map(|r| r.h).collect();
        println!(
            "{name:<10}{:>16.8}{:>16.8}{:>16.8}{:>16.8}",
            h[9], h[49], h[199], h[499]
        );
    }
    Ok(())
}
