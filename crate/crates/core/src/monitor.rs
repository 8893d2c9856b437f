//! Runtime certificates for the descent framework behind the solvers.
//!
//! Every accepted step is checked against:
//!
//! * sufficient decrease of the Lyapunov function
//!   `H(x, y) = h(x) + Σⱼ δⱼ‖xⱼ − yⱼ‖²_{Aⱼ}`, i.e.
//!   `H(xⁿ⁺¹, xⁿ) + γ ς(A) ‖xⁿ − xⁿ⁻¹‖² ≤ H(xⁿ, xⁿ⁻¹)`;
//! * the pairing chain: `H` evaluated with the new `(δ, A)` before the step
//!   never exceeds the value stored after the previous step;
//! * the relative error bound `‖w‖ ≤ (b/2)(‖xⁿ⁺¹ − xⁿ‖ + ‖xⁿ − xⁿ⁻¹‖)` for an
//!   explicit subgradient `w ∈ ∂h(xⁿ⁺¹)`;
//! * the parameter floors `γ ≥ c`, `α ≥ α_min` and `ς(A) ≥ ε_A`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metric::DiagonalMetric;

/// `h`, the penalty `Σ δⱼ‖xⱼ − yⱼ‖²_{Aⱼ}` and their sum `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovValue {
    pub h: f64,
    pub penalty: f64,
    pub total: f64,
}

impl LyapunovValue {
    pub fn new(h: f64, penalty: f64) -> Self {
        Self {
            h,
            penalty,
            total: h + penalty,
        }
    }
}

/// Outcome of a single inequality check. `margin` is `rhs − lhs` before
/// tolerance, so a negative margin means the raw inequality is violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub passed: bool,
    pub margin: f64,
}

/// Sufficient decrease `H_next + γ ς d² ≤ H_prev` (within `tol`).
pub fn check_descent(
    prev: &LyapunovValue,
    next: &LyapunovValue,
    gamma: f64,
    sigma_a: f64,
    d_prev: f64,
    tol: f64,
) -> Check {
    let margin = prev.total - (next.total + gamma * sigma_a * d_prev * d_prev);
    Check {
        passed: margin >= -tol,
        margin,
    }
}

/// Which form of the inertial term the proximal step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InertiaForm {
    /// `yⁿ = xⁿ + β(xⁿ − xⁿ⁻¹)` inside `‖· − yⁿ‖_A`: inertia measured in the metric.
    #[default]
    MetricWeighted,
    /// Euclidean inertia `−(β/α)⟨xⁿ − xⁿ⁻¹, x⟩`, i.e. `yⁿ = xⁿ + βA⁻¹(xⁿ − xⁿ⁻¹)`.
    Euclidean,
}

/// Explicit element of `∂h(xⁿ⁺¹)` restricted to the updated block:
///
/// `w = A(xⁿ − xⁿ⁺¹)/α − ∇f(xⁿ) + (β/α)A(xⁿ − xⁿ⁻¹) + ∇f(xⁿ⁺¹)`.
#[allow(clippy::too_many_arguments)]
pub fn subgradient_residual(
    x_new: &[f64],
    x_old: &[f64],
    x_older: &[f64],
    grad_old: &[f64],
    grad_new: &[f64],
    alpha: f64,
    beta: f64,
    metric: &DiagonalMetric,
    form: InertiaForm,
) -> Vec<f64> {
    let a = metric.entries();
    (0..x_new.len())
        .map(|i| {
            let inertia = match form {
                InertiaForm::MetricWeighted => a[i] * (x_old[i] - x_older[i]),
                InertiaForm::Euclidean => x_old[i] - x_older[i],
            };
            a[i] * (x_old[i] - x_new[i]) / alpha - grad_old[i]
                + beta / alpha * inertia
                + grad_new[i]
        })
        .collect()
}

/// The constant `b = 2·max(‖A‖/α + L, (β/α)‖A‖)` of the relative error bound.
pub fn relative_error_constant(alpha: f64, beta: f64, lipschitz: f64, a_max: f64) -> f64 {
    2.0 * (a_max / alpha + lipschitz).max(beta / alpha * a_max)
}

/// Relative error `‖w‖ ≤ (b/2)(d_next + d_prev)` (within `tol`).
#[allow(clippy::too_many_arguments)]
pub fn check_relative_error(
    residual_norm: f64,
    d_next: f64,
    d_prev: f64,
    alpha: f64,
    beta: f64,
    lipschitz: f64,
    a_max: f64,
    tol: f64,
) -> Check {
    let b = relative_error_constant(alpha, beta, lipschitz, a_max);
    let margin = 0.5 * b * (d_next + d_prev) - residual_norm;
    Check {
        passed: margin >= -tol,
        margin,
    }
}

/// One row of a solver trace, describing the state after iteration `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub n: usize,
    pub h: f64,
    /// Lyapunov value `H(xⁿ, xⁿ⁻¹)` with the pairing of the step that produced `xⁿ`.
    pub lyapunov: f64,
    /// `‖xⁿ − xⁿ⁻¹‖` on the updated block.
    pub d_n: f64,
    pub residual: f64,
    pub path_length: f64,
    pub block: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lipschitz: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// Cumulative path length and the share of it travelled in the last quarter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub total: f64,
    pub tail_ratio: f64,
}

pub fn finite_length(trace: &[TraceRecord]) -> PathSummary {
    path_summary(trace.iter().map(|r| r.d_n))
}

/// [`finite_length`] on a plain sequence of step lengths.
pub fn path_summary(steps: impl IntoIterator<Item = f64>) -> PathSummary {
    let steps: Vec<f64> = steps.into_iter().collect();
    let total: f64 = steps.iter().sum();
    let tail_start = steps.len() - steps.len() / 4;
    let tail: f64 = steps[tail_start..].iter().sum();
    let tail_ratio = if total > 0.0 { tail / total } else { 0.0 };
    PathSummary { total, tail_ratio }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonitorLevel {
    Off,
    /// Evaluate and remember violations, never abort.
    #[default]
    Record,
    /// Abort the run on the first violation.
    Assert,
}

impl FromStr for MonitorLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(Self::Off),
            "record" => Ok(Self::Record),
            "assert" => Ok(Self::Assert),
            other => Err(Error::InvalidConfig(format!(
                "unknown monitor level `{other}`"
            ))),
        }
    }
}

impl fmt::Display for MonitorLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Off => "off",
            Self::Record => "record",
            Self::Assert => "assert",
        })
    }
}

/// Relative tolerances of the per-iteration checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Descent and pairing checks use `descent · (1 + |H|)`.
    pub descent: f64,
    /// The relative error check uses `residual · (1 + ‖w‖)`.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            descent: 1e-10,
            residual: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    Descent,
    Pairing,
    RelativeError,
    GammaFloor,
    AlphaFloor,
    MetricFloor,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Descent => "sufficient decrease",
            Self::Pairing => "(δ, A) pairing",
            Self::RelativeError => "relative error",
            Self::GammaFloor => "γ ≥ c",
            Self::AlphaFloor => "α ≥ α_min",
            Self::MetricFloor => "ς(A) ≥ ε_A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub iteration: usize,
    pub kind: CertificateKind,
    pub margin: f64,
}

/// Everything the monitor needs to know about one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCertificate {
    /// 1-based index of the produced iterate.
    pub iteration: usize,
    pub block: usize,
    /// `H(xⁿ, xⁿ⁻¹)` with the pairing of this step.
    pub before: LyapunovValue,
    /// `H(xⁿ⁺¹, xⁿ)` with the pairing of this step.
    pub after: LyapunovValue,
    pub d_prev: f64,
    pub d_next: f64,
    pub residual_norm: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lipschitz: f64,
    pub gamma: f64,
    pub sigma_a: f64,
    pub a_max: f64,
    pub gamma_target: f64,
    pub alpha_min: f64,
    pub metric_floor: f64,
}

/// Per-run certificate checker. Owned by a single run; keeps the last
/// accepted Lyapunov value to verify the pairing chain.
#[derive(Debug, Clone, Default)]
pub struct CertificateMonitor {
    level: MonitorLevel,
    tolerances: Tolerances,
    stored: Option<LyapunovValue>,
    violations: Vec<Violation>,
    checked: usize,
}

impl CertificateMonitor {
    pub fn new(level: MonitorLevel) -> Self {
        Self {
            level,
            ..Self::default()
        }
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn level(&self) -> MonitorLevel {
        self.level
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Number of steps that went through the checks.
    pub fn checked_steps(&self) -> usize {
        self.checked
    }

    pub fn observe(&mut self, step: &StepCertificate) -> Result<()> {
        if self.level == MonitorLevel::Off {
            return Ok(());
        }
        self.checked += 1;
        let tol_h = self.tolerances.descent * (1.0 + step.before.total.abs());
        let mut found = Vec::new();

        let descent = check_descent(
            &step.before,
            &step.after,
            step.gamma,
            step.sigma_a,
            step.d_prev,
            tol_h,
        );
        if !descent.passed {
            found.push((CertificateKind::Descent, descent.margin));
        }
        if let Some(stored) = self.stored {
            let margin = stored.total - step.before.total;
            if margin < -self.tolerances.descent * (1.0 + stored.total.abs()) {
                found.push((CertificateKind::Pairing, margin));
            }
        }
        let rel = check_relative_error(
            step.residual_norm,
            step.d_next,
            step.d_prev,
            step.alpha,
            step.beta,
            step.lipschitz,
            step.a_max,
            self.tolerances.residual * (1.0 + step.residual_norm),
        );
        if !rel.passed {
            found.push((CertificateKind::RelativeError, rel.margin));
        }
        // parameter floors, with relative slack for the rounding in α ↦ γ
        let gamma_margin = step.gamma - step.gamma_target;
        if gamma_margin < -1e-9 * step.gamma_target {
            found.push((CertificateKind::GammaFloor, gamma_margin));
        }
        if step.alpha < step.alpha_min {
            found.push((CertificateKind::AlphaFloor, step.alpha - step.alpha_min));
        }
        if step.sigma_a < step.metric_floor * (1.0 - 1e-12) {
            found.push((
                CertificateKind::MetricFloor,
                step.sigma_a - step.metric_floor,
            ));
        }

        self.stored = Some(step.after);
        for (kind, margin) in found {
            let v = Violation {
                iteration: step.iteration,
                kind,
                margin,
            };
            log::warn!(
                "certificate {} violated at iteration {} (block {}), margin {:e}",
                kind,
                step.iteration,
                step.block,
                margin
            );
            self.violations.push(v);
            if self.level == MonitorLevel::Assert {
                return Err(Error::Certificate {
                    iteration: step.iteration,
                    detail: format!(
                        "{kind} check failed on block {} with margin {margin:e}",
                        step.block
                    ),
                });
            }
        }
        Ok(())
    }
}
