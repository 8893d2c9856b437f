use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use ipiano::monitor::Tolerances;
use ipiano::problem::{DenseQuadratic, L1Norm, SquaredDistance};
use ipiano::solver::make_variant;
use ipiano::{run, Block, BlockProblem, CertificateMonitor, MonitorLevel, Variant, VariantConfig};

/// Random symmetric positive definite `Q = MᵀM + I/2`.
fn spd(n: usize, entries: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = (0..n)
                .map(|k| entries[k * n + i] * entries[k * n + j])
                .sum::<f64>();
        }
        q[i * n + i] += 0.5;
    }
    q
}

fn lasso(n: usize, entries: &[f64], b: Vec<f64>, split: usize) -> BlockProblem {
    let dims = [split, n - split];
    BlockProblem::new(
        DenseQuadratic::new(spd(n, entries), b, &dims).unwrap(),
        vec![
            Block::new(split, L1Norm { lambda: 0.1 }),
            Block::new(n - split, L1Norm { lambda: 0.1 }),
        ],
    )
    .unwrap()
}

fn instance() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, Vec<f64>, usize)> {
    (2usize..6).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(-1.0..1.0f64, n * n),
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(-2.0..2.0f64, n),
            1..n,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_variant_keeps_its_certificates((n, m, b, x0, split) in instance(), v in 0usize..8, beta in 0.0..0.95f64) {
        let problem = lasso(n, &m, b, split);
        let variant = Variant::ALL[v];
        let cfg = make_variant(variant.name(), &VariantConfig { beta, max_iters: 60, ..VariantConfig::default() }).unwrap();
        let mut monitor = CertificateMonitor::new(MonitorLevel::Record);
        let out = run(&problem, x0, &cfg, &mut monitor).unwrap();
        prop_assert!(monitor.violations().is_empty(), "{:?}", monitor.violations());
        // rounding can lift H by a few ulps once the iterates stall
        let tol = Tolerances::default().descent;
        prop_assert!(out.trace.windows(2).all(|w| w[1].lyapunov <= w[0].lyapunov + tol * (1.0 + w[0].lyapunov.abs())));
        prop_assert!(out.trace.iter().all(|r| r.gamma > 0.0 && r.alpha > 0.0));
    }

    #[test]
    fn runs_are_reproducible((n, m, b, x0, split) in instance(), seed in any::<u64>()) {
        let problem = lasso(n, &m, b, split);
        let mut cfg = make_variant("bc-vm-ipiano", &VariantConfig { max_iters: 30, seed, ..VariantConfig::default() }).unwrap();
        cfg.schedule = ipiano::solver::Schedule::RandomPermutation;
        let a = run(&problem, x0.clone(), &cfg, &mut CertificateMonitor::default()).unwrap();
        let b = run(&problem, x0, &cfg, &mut CertificateMonitor::default()).unwrap();
        prop_assert_eq!(a.x, b.x);
        prop_assert_eq!(a.trace, b.trace);
    }
}

#[test]
fn separable_quadratic_reaches_its_minimizer() {
    // f = ½‖x‖², g = ½·4‖x − t‖², minimizer x = 4t/5
    let t = vec![1.0, -2.0, 0.5];
    let q = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let problem = BlockProblem::new(
        DenseQuadratic::new(q, vec![0.0; 3], &[3]).unwrap(),
        vec![Block::new(3, SquaredDistance::new(4.0, t.clone()))],
    )
    .unwrap();
    for v in Variant::ALL {
        let cfg = make_variant(
            v.name(),
            &VariantConfig {
                max_iters: 400,
                ..VariantConfig::default()
            },
        )
        .unwrap();
        let out = run(
            &problem,
            vec![0.0; 3],
            &cfg,
            &mut CertificateMonitor::new(MonitorLevel::Assert),
        )
        .unwrap();
        for (x, ti) in out.x.iter().zip(&t) {
            assert_abs_diff_eq!(*x, 0.8 * ti, epsilon = 1e-9);
        }
    }
}
