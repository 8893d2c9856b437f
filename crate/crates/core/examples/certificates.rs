//! Walks through the per-step certificates: Lyapunov descent, the pairing
//! chain between steps, the relative-error bound on the subgradient, and
//! the finite-length accumulator.

use ipiano::inpaint::{phantom, random_mask, InpaintProblem, DEFAULT_EPSILON, DEFAULT_GAMMA};
use ipiano::monitor::{check_descent, relative_error_constant, CertificateMonitor, MonitorLevel};
use ipiano::solver::{make_variant, Solver, VariantConfig};

fn main() -> ipiano::Result<()> {
    let image = phantom(24, 24);
    let mask = random_mask(24, 24, 0.1, 5)?;
    let problem = InpaintProblem::new(image, mask, DEFAULT_GAMMA, DEFAULT_EPSILON)?;
    let bp = problem.block_problem();
    let cfg = make_variant("bc-vm-ipiano", &VariantConfig::default())?;

    let mut solver = Solver::new(&bp, problem.initial_point(), cfg)?;
    let mut monitor = CertificateMonitor::new(MonitorLevel::Assert);
    println!(
        "{:>4} {:>5} {:>14} {:>14} {:>11} {:>11} {:>11} {:>9}",
        "n", "block", "H before", "H after", "descent", "residual", "bound", "fallback"
    );
    for _ in 0..20 {
        let report = solver.step()?;
        let c = &report.certificate;
        monitor.observe(c)?;
        let descent = check_descent(&c.before, &c.after, c.gamma, c.sigma_a, c.d_prev, 0.0);
        let b = relative_error_constant(c.alpha, c.beta, c.lipschitz, c.a_max);
        println!(
            "{:>4} {:>5} {:>14.8} {:>14.8} {:>11.3e} {:>11.3e} {:>11.3e} {:>9}",
            c.iteration,
            c.block,
            c.before.total,
            c.after.total,
            descent.margin,
            c.residual_norm,
            0.5 * b * (c.d_next + c.d_prev),
            report.fallback
        );
    }
    println!(
        "{} steps checked, {} violations",
        monitor.checked_steps(),
        monitor.violations().len()
    );
    Ok(())
}
