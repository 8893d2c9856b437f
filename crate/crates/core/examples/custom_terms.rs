//! Plugging in user-defined terms: a smooth Rosenbrock-like coupling and a
//! box constraint, solved with the block inertial method.

use ipiano::metric::DiagonalMetric;
use ipiano::monitor::{CertificateMonitor, MonitorLevel};
use ipiano::problem::{Block, BlockProblem, NonsmoothTerm, SmoothTerm};
use ipiano::solver::{make_variant, run, VariantConfig};

/// `f(u, v) = (1 − u)² + 5(v − u²)²` with `u`, `v` scalar blocks.
struct Banana;

impl SmoothTerm for Banana {
    fn value(&self, x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 5.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    fn block_gradient(&self, x: &[f64], block: usize) -> Vec<f64> {
        let r = x[1] - x[0] * x[0];
        match block {
            0 => vec![-2.0 * (1.0 - x[0]) - 20.0 * x[0] * r],
            _ => vec![10.0 * r],
        }
    }

    // valid on the box below
    fn lipschitz_hint(&self, block: usize) -> f64 {
        match block {
            0 => 2.0 + 20.0 * (3.0 * 1.5 * 1.5 + 2.0),
            _ => 10.0,
        }
    }
}

/// Indicator of `[lo, hi]ⁿ`.
struct BoxConstraint {
    lo: f64,
    hi: f64,
}

impl NonsmoothTerm for BoxConstraint {
    fn value(&self, x: &[f64]) -> f64 {
        if x.iter().all(|v| (self.lo..=self.hi).contains(v)) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(
        &self,
        v: &[f64],
        y: &[f64],
        alpha: f64,
        metric: &DiagonalMetric,
    ) -> ipiano::Result<Vec<f64>> {
        Ok(y.iter()
            .zip(v)
            .zip(metric.entries())
            .map(|((yi, vi), a)| (yi - alpha * vi / a).clamp(self.lo, self.hi))
            .collect())
    }

    fn is_semiconvex(&self) -> bool {
        true
    }
}

fn main() -> ipiano::Result<()> {
    let problem = BlockProblem::new(
        Banana,
        vec![
            Block::new(1, BoxConstraint { lo: -1.5, hi: 1.5 }),
            Block::new(1, BoxConstraint { lo: -1.5, hi: 0.5 }),
        ],
    )?;
    for name in ["bc-fb", "bc-ipiano"] {
        let cfg = make_variant(
            name,
            &VariantConfig {
                max_iters: 4000,
                beta: 0.4,
                ..VariantConfig::default()
            },
        )?;
        let mut monitor = CertificateMonitor::new(MonitorLevel::Assert);
        let out = run(&problem, vec![-1.0, 0.0], &cfg, &mut monitor)?;
        println!(
            "{name:<10} x = ({:.6}, {:.6})  h = {:.8}",
            out.x[0],
            out.x[1],
            out.trace.last().unwrap().h
        );
    }
    Ok(())
}
