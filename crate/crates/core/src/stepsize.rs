//! Step-size machinery: Lipschitz backtracking, the `(δ, γ)` parametrization
//! and the compatibility guard between consecutive `(δ, A)` pairs.
//!
//! With `σ ∈ {0, 1}` the semi-convexity flag of `g` and `m` its modulus,
//!
//! ```text
//! δ = ½ ((1 + σ − β)/α − (L − σm)),      γ = δ − β/(2α).
//! ```
//!
//! Convergence needs `inf γ > 0`; step sizes here are chosen so that `γ`
//! equals a prescribed constant `c`.

use crate::error::{Error, Result};
use crate::metric::DiagonalMetric;

/// Relative slack in the quadratic upper bound test, absorbing rounding in
/// the evaluation of `f` at nearby points.
pub const MAJORIZATION_SLACK: f64 = 1e-12;

/// Absolute tolerance of [`delta_guard`].
pub const GUARD_TOLERANCE: f64 = 1e-12;

/// Backtracking never grows `L` beyond `2^60 · L_init`.
pub const BACKTRACK_CAP_DOUBLINGS: i32 = 60;

/// The ingredients of `f(x⁺) ≤ f(x) + ⟨∇f(x), x⁺ − x⟩ + (L/2)‖x⁺ − x‖²_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticBound {
    pub f_old: f64,
    /// `⟨∇f(x), x⁺ − x⟩`.
    pub slope: f64,
    /// `‖x⁺ − x‖²_A`.
    pub dist_sq: f64,
    pub f_new: f64,
}

impl QuadraticBound {
    pub fn holds(&self, lipschitz: f64) -> bool {
        let rhs = self.f_old + self.slope + 0.5 * lipschitz * self.dist_sq;
        self.f_new <= rhs + MAJORIZATION_SLACK * (1.0 + self.f_old.abs())
    }
}

/// Smallest `L_init · 2ᵏ` (`k ≥ 0`) for which the quadratic bound holds.
pub fn backtrack_lipschitz(bound: &QuadraticBound, l_init: f64) -> Result<f64> {
    if !(l_init > 0.0) {
        return Err(Error::InfeasibleStep(format!(
            "Lipschitz estimate must be positive, got {l_init}"
        )));
    }
    let mut l = l_init;
    for _ in 0..=BACKTRACK_CAP_DOUBLINGS {
        if bound.holds(l) {
            return Ok(l);
        }
        l *= 2.0;
    }
    Err(Error::BacktrackingCap {
        cap: l_init * 2f64.powi(BACKTRACK_CAP_DOUBLINGS),
    })
}

/// Evaluates `(δ, γ)` for the given parameters.
pub fn delta_gamma(
    alpha: f64,
    beta: f64,
    lipschitz: f64,
    semiconvex: bool,
    modulus: f64,
) -> (f64, f64) {
    let s = if semiconvex { 1.0 } else { 0.0 };
    let delta = 0.5 * ((1.0 + s - beta) / alpha - (lipschitz - s * modulus));
    let gamma = delta - beta / (2.0 * alpha);
    (delta, gamma)
}

/// The step size that makes `γ = c` exactly:
/// `α = (1 + σ − 2β) / (L − σm + 2c)`.
pub fn feasible_alpha(
    beta: f64,
    lipschitz: f64,
    semiconvex: bool,
    modulus: f64,
    c: f64,
) -> Result<f64> {
    let s = if semiconvex { 1.0 } else { 0.0 };
    if !(c > 0.0) {
        return Err(Error::InfeasibleStep(format!(
            "γ target must be positive, got {c}"
        )));
    }
    if !(beta >= 0.0) {
        return Err(Error::InfeasibleStep(format!(
            "inertia must be non-negative, got {beta}"
        )));
    }
    let numerator = 1.0 + s - 2.0 * beta;
    if numerator <= f64::EPSILON {
        return Err(Error::InfeasibleStep(format!(
            "inertia β = {beta} violates β < (1 + σ)/2 = {}",
            0.5 * (1.0 + s)
        )));
    }
    let denominator = lipschitz - s * modulus + 2.0 * c;
    if denominator <= 0.0 {
        return Err(Error::InfeasibleStep(format!(
            "L − σm + 2c = {denominator} is not positive"
        )));
    }
    Ok(numerator / denominator)
}

/// `δ_next ‖d‖²_{A_next} ≤ δ_prev ‖d‖²_{A_prev}` up to [`GUARD_TOLERANCE`].
pub fn delta_guard(
    delta_next: f64,
    metric_next: &DiagonalMetric,
    delta_prev: f64,
    metric_prev: &DiagonalMetric,
    d: &[f64],
) -> bool {
    let lhs = delta_next * metric_next.norm_sq_unchecked(d);
    let rhs = delta_prev * metric_prev.norm_sq_unchecked(d);
    lhs <= rhs + GUARD_TOLERANCE
}

/// Accepted parameters of one (block) step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub alpha: f64,
    pub beta: f64,
    pub lipschitz: f64,
    pub delta: f64,
    pub gamma: f64,
    pub semiconvex: bool,
    /// Semi-convexity modulus; zero when `semiconvex` is false.
    pub modulus: f64,
}

impl StepParams {
    /// Picks `α` via [`feasible_alpha`] so that `γ = c`.
    pub fn targeting(
        beta: f64,
        lipschitz: f64,
        semiconvex: bool,
        modulus: f64,
        c: f64,
    ) -> Result<Self> {
        let modulus = if semiconvex { modulus } else { 0.0 };
        let alpha = feasible_alpha(beta, lipschitz, semiconvex, modulus, c)?;
        let (delta, gamma) = delta_gamma(alpha, beta, lipschitz, semiconvex, modulus);
        Ok(Self {
            alpha,
            beta,
            lipschitz,
            delta,
            gamma,
            semiconvex,
            modulus,
        })
    }
}
