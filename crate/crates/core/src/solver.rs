//! Variable metric iPiano and its block coordinate extension.
//!
//! One iteration updates a *group* of blocks: all blocks at once for the
//! joint algorithm, a single block for the block coordinate algorithm. For
//! the selected group with current iterate `x`, previous iterate `x⁻`,
//! metric `A` and parameters `(α, β, L)`:
//!
//! ```text
//! y  = x + β (x − x⁻)
//! x⁺ = argmin_u  g(u) + ⟨∇f(x), u⟩ + (1/2α)‖u − y‖²_A
//! ```
//!
//! where `L` is backtracked until `f(x⁺) ≤ f(x) + ⟨∇f(x), x⁺ − x⟩ + (L/2)‖x⁺ − x‖²_A`
//! and `α` is picked so that `γ = c`. Before the proximal step the new pair
//! `(δ, A)` must pass [`delta_guard`] against the pair of the group's previous
//! update; otherwise the previous metric (and `L`) is reused, and as a last
//! resort the inertia is dropped for that step, which makes `δ = c`.
//!
//! Every group keeps its own previous iterate, so blocks that were not
//! touched keep their inertial memory until their next update.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{DiagonalMetric, DEFAULT_FLOOR};
use crate::monitor::{
    subgradient_residual, CertificateMonitor, InertiaForm, LyapunovValue, StepCertificate,
    TraceRecord,
};
use crate::problem::BlockProblem;
use crate::stepsize::{backtrack_lipschitz, delta_guard, QuadraticBound, StepParams};

/// Inertia used by the inertial variants.
pub const DEFAULT_BETA: f64 = 0.7;

/// Relative shortening of the boundary step sizes `(1 + σ − 2β)/L` so that
/// `γ > 0` strictly.
pub const STEP_SHAVE: f64 = 1e-3;

/// Floor on Lipschitz hints, so that blocks on which `f` is flat still get a
/// finite step and a positive `γ` target.
pub const MIN_LIPSCHITZ: f64 = 1e-8;

/// The `γ` target, as a fraction of the Lipschitz hint, that turns the
/// boundary step `(1 + σ − 2β)/L` into `(1 − STEP_SHAVE)` times itself.
pub fn shave_gamma_factor(shave: f64) -> f64 {
    0.5 * shave / (1.0 - shave)
}

/// Block visiting order of the block coordinate algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Cyclic,
    /// A fresh random permutation of the blocks in every sweep.
    RandomPermutation,
}

/// Solver configuration; see [`make_variant`] for the eight named presets.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantConfig {
    pub inertial: bool,
    pub variable_metric: bool,
    pub block: bool,
    /// Inertia applied when `inertial` is set; ignored otherwise.
    pub beta: f64,
    pub schedule: Schedule,
    pub max_iters: usize,
    pub seed: u64,
    /// `γ` target as a fraction of each group's Lipschitz hint: `c = c·L₀`.
    pub c: f64,
    pub alpha_min: f64,
    /// Lower bound `ε_A` on metric entries.
    pub metric_floor: f64,
    pub inertia_form: InertiaForm,
}

impl Default for VariantConfig {
    fn default() -> Self {
        Self {
            inertial: false,
            variable_metric: false,
            block: false,
            beta: DEFAULT_BETA,
            schedule: Schedule::Cyclic,
            max_iters: 1000,
            seed: 0,
            c: shave_gamma_factor(STEP_SHAVE),
            alpha_min: 1e-12,
            metric_floor: DEFAULT_FLOOR,
            inertia_form: InertiaForm::MetricWeighted,
        }
    }
}

impl VariantConfig {
    /// The inertia actually used: `beta` for inertial variants, zero otherwise.
    pub fn effective_beta(&self) -> f64 {
        if self.inertial {
            self.beta
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let beta = self.effective_beta();
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidConfig(format!(
                "β = {beta} must lie in [0, 1)"
            )));
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "c = {} must be positive",
                self.c
            )));
        }
        if !(self.alpha_min > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "α_min = {} must be positive",
                self.alpha_min
            )));
        }
        if !(self.metric_floor > 0.0 && self.metric_floor < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "metric floor {} must lie in (0, 1)",
                self.metric_floor
            )));
        }
        Ok(())
    }
}

/// The eight method variants compared on the inpainting problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Fb,
    BcFb,
    VmFb,
    BcVmFb,
    Ipiano,
    BcIpiano,
    VmIpiano,
    BcVmIpiano,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Fb,
        Variant::BcFb,
        Variant::VmFb,
        Variant::BcVmFb,
        Variant::Ipiano,
        Variant::BcIpiano,
        Variant::VmIpiano,
        Variant::BcVmIpiano,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Fb => "fb",
            Variant::BcFb => "bc-fb",
            Variant::VmFb => "vm-fb",
            Variant::BcVmFb => "bc-vm-fb",
            Variant::Ipiano => "ipiano",
            Variant::BcIpiano => "bc-ipiano",
            Variant::VmIpiano => "vm-ipiano",
            Variant::BcVmIpiano => "bc-vm-ipiano",
        }
    }

    pub fn is_inertial(self) -> bool {
        matches!(
            self,
            Variant::Ipiano | Variant::BcIpiano | Variant::VmIpiano | Variant::BcVmIpiano
        )
    }

    pub fn is_variable_metric(self) -> bool {
        matches!(
            self,
            Variant::VmFb | Variant::BcVmFb | Variant::VmIpiano | Variant::BcVmIpiano
        )
    }

    pub fn is_block(self) -> bool {
        matches!(
            self,
            Variant::BcFb | Variant::BcVmFb | Variant::BcIpiano | Variant::BcVmIpiano
        )
    }

    /// The constant step size `2(1 − β)/L` of the identity-metric schemes
    /// (`2/L` without inertia), before shaving.
    pub fn reference_step(self, beta: f64, lipschitz: f64) -> f64 {
        let beta = if self.is_inertial() { beta } else { 0.0 };
        2.0 * (1.0 - beta) / lipschitz
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == lower)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Applies the flags of a named variant on top of `base`.
pub fn make_variant(name: &str, base: &VariantConfig) -> Result<VariantConfig> {
    let v: Variant = name.parse()?;
    Ok(VariantConfig {
        inertial: v.is_inertial(),
        variable_metric: v.is_variable_metric(),
        block: v.is_block(),
        ..base.clone()
    })
}

#[derive(Debug, Clone)]
struct Group {
    range: Range<usize>,
    blocks: Vec<usize>,
}

/// Per-group memory carried between updates of that group.
#[derive(Debug, Clone)]
pub struct GroupState {
    /// Value of the group's coordinates before its last update.
    pub previous: Vec<f64>,
    pub metric: DiagonalMetric,
    /// Parameters of the last accepted update; `None` before the first one.
    pub params: Option<StepParams>,
    /// `δ‖x − x⁻‖²_A` for the current memory.
    penalty: f64,
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub certificate: StepCertificate,
    pub params: StepParams,
    /// 0: candidate metric as configured, 1: candidate metric with relaxed
    /// `β`/`γ`, 2: previous metric reused.
    pub fallback: u8,
    pub backtracks: usize,
    pub objective: f64,
}

pub struct Solver<'p> {
    problem: &'p BlockProblem,
    cfg: VariantConfig,
    groups: Vec<Group>,
    x: Vec<f64>,
    objective: f64,
    memory: Vec<GroupState>,
    n: usize,
    order: Vec<usize>,
    rng: ChaCha8Rng,
}

/// `γ` may drop to this fraction of its target to keep consecutive
/// `(δ, A)` pairs compatible.
pub const GAMMA_FLOOR_RATIO: f64 = 1e-3;

/// Largest `(β, γ)` with `β ≤ beta_max`, `γ ∈ [c_floor, c]` and
/// `δ(β, γ) ≤ budget`, preferring inertia over `γ`. `None` if even
/// `(0, c_floor)` exceeds the budget.
fn relax_inertia(
    budget: f64,
    beta_max: f64,
    c: f64,
    c_floor: f64,
    lipschitz: f64,
    semiconvex: bool,
    modulus: f64,
) -> Option<(f64, f64)> {
    // δ(β, γ) = γ + βK/(2(s − 2β)) with K = L − σm + 2γ, s = 1 + σ
    let shrink = 1.0 - 1e-12;
    let s = if semiconvex { 2.0 } else { 1.0 };
    let m = if semiconvex { modulus } else { 0.0 };
    if budget >= c {
        let k = lipschitz - m + 2.0 * c;
        let slack = budget - c;
        let beta = (2.0 * slack * s / (k + 4.0 * slack)) * shrink;
        return Some((beta.min(beta_max), c));
    }
    if budget >= c_floor {
        return Some((0.0, (budget * shrink).max(c_floor)));
    }
    None
}

/// Cap on proximal recomputations within one step.
const MAX_STEP_ATTEMPTS: usize = 200;

impl<'p> Solver<'p> {
    pub fn new(problem: &'p BlockProblem, x0: Vec<f64>, cfg: VariantConfig) -> Result<Self> {
        cfg.validate()?;
        let objective = problem.objective(&x0)?;
        if !objective.is_finite() {
            return Err(Error::OutsideDomain(objective));
        }
        let groups: Vec<Group> = if cfg.block {
            (0..problem.num_blocks())
                .map(|j| Group {
                    range: problem.block_range(j),
                    blocks: vec![j],
                })
                .collect()
        } else {
            vec![Group {
                range: 0..problem.dim(),
                blocks: (0..problem.num_blocks()).collect(),
            }]
        };
        let memory = groups
            .iter()
            .map(|g| GroupState {
                previous: x0[g.range.clone()].to_vec(),
                metric: DiagonalMetric::identity(g.range.len()),
                params: None,
                penalty: 0.0,
            })
            .collect();
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self {
            problem,
            cfg,
            groups,
            x: x0,
            objective,
            memory,
            n: 0,
            order: Vec::new(),
            rng,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn iteration(&self) -> usize {
        self.n
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_state(&self, group: usize) -> &GroupState {
        &self.memory[group]
    }

    pub fn config(&self) -> &VariantConfig {
        &self.cfg
    }

    /// Current Lyapunov value `h(x) + Σ δⱼ‖xⱼ − xⱼ⁻‖²_{Aⱼ}`.
    pub fn lyapunov(&self) -> LyapunovValue {
        LyapunovValue::new(self.objective, self.memory.iter().map(|m| m.penalty).sum())
    }

    fn next_group(&mut self) -> usize {
        let count = self.groups.len();
        match self.cfg.schedule {
            Schedule::Cyclic => self.n % count,
            Schedule::RandomPermutation => {
                if self.order.is_empty() {
                    self.order = (0..count).collect();
                    self.order.shuffle(&mut self.rng);
                    self.order.reverse();
                }
                self.order.pop().unwrap()
            }
        }
    }

    /// Performs one iteration on the group chosen by the schedule.
    pub fn step(&mut self) -> Result<StepReport> {
        let j = self.next_group();
        self.step_group(j)
    }

    fn group_gradient(&self, x: &[f64], group: usize) -> Result<Vec<f64>> {
        let mut grad = Vec::with_capacity(self.groups[group].range.len());
        for &b in &self.groups[group].blocks {
            grad.extend(self.problem.block_gradient(x, b)?);
        }
        Ok(grad)
    }

    /// Candidate metric and Lipschitz estimate for a group at the current point.
    fn candidate_metric(&self, group: usize) -> Result<(DiagonalMetric, f64)> {
        let g = &self.groups[group];
        let smooth = self.problem.smooth();
        if self.cfg.variable_metric {
            let mut raw = Vec::with_capacity(g.range.len());
            let mut complete = true;
            for &b in &g.blocks {
                match smooth.block_majorizer(&self.x, b) {
                    Some(d) => raw.extend(d),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                return DiagonalMetric::normalize(&raw, self.cfg.metric_floor);
            }
        }
        Ok((
            DiagonalMetric::identity(g.range.len()),
            self.lipschitz_hint(group),
        ))
    }

    fn lipschitz_hint(&self, group: usize) -> f64 {
        self.groups[group]
            .blocks
            .iter()
            .map(|&b| self.problem.smooth().lipschitz_hint(b))
            .fold(MIN_LIPSCHITZ, f64::max)
    }

    /// Semi-convexity flag and modulus of `Σ gᵦ` over the group's blocks.
    fn semiconvexity(&self, group: usize, metric: &DiagonalMetric) -> (bool, f64) {
        let g = &self.groups[group];
        let mut semiconvex = true;
        let mut modulus = f64::INFINITY;
        for &b in &g.blocks {
            let term = self.problem.term(b);
            if !term.is_semiconvex() {
                semiconvex = false;
                break;
            }
            let r = self.problem.block_range(b);
            let local = r.start - g.range.start..r.end - g.range.start;
            modulus = modulus.min(term.modulus(&metric.restrict(local)));
        }
        if semiconvex {
            (true, modulus)
        } else {
            (false, 0.0)
        }
    }

    fn prox_group(
        &self,
        group: usize,
        grad: &[f64],
        anchor: &[f64],
        alpha: f64,
        metric: &DiagonalMetric,
    ) -> Result<Vec<f64>> {
        let g = &self.groups[group];
        let mut out = Vec::with_capacity(g.range.len());
        for &b in &g.blocks {
            let r = self.problem.block_range(b);
            let local = r.start - g.range.start..r.end - g.range.start;
            out.extend(self.problem.term(b).prox(
                &grad[local.clone()],
                &anchor[local.clone()],
                alpha,
                &metric.restrict(local),
            )?);
        }
        Ok(out)
    }

    /// One iteration of the (block) update on group `group`.
    pub fn step_group(&mut self, group: usize) -> Result<StepReport> {
        let range = self.groups[group].range.clone();
        let smooth = self.problem.smooth();
        let x_cur: Vec<f64> = self.x[range.clone()].to_vec();
        let x_prev = self.memory[group].previous.clone();
        let d_prev_vec: Vec<f64> = x_cur.iter().zip(&x_prev).map(|(a, b)| a - b).collect();

        let grad_old = self.group_gradient(&self.x, group)?;
        let f_old = smooth.value(&self.x);
        let (candidate, l_candidate) = self.candidate_metric(group)?;
        let c = self.cfg.c * self.lipschitz_hint(group);
        let c_floor = c * GAMMA_FLOOR_RATIO;
        let beta_cfg = self.cfg.effective_beta();

        let prev_state = &self.memory[group];
        let mut fallback: u8 = 0;
        let mut lipschitz = l_candidate;
        let mut backtracks = 0;
        let mut attempts = 0;

        let (params, metric, x_new_block, x_new, f_new) = loop {
            attempts += 1;
            if attempts > MAX_STEP_ATTEMPTS {
                return Err(Error::InfeasibleStep(format!(
                    "no acceptable step on group {group} after {MAX_STEP_ATTEMPTS} attempts"
                )));
            }
            let reuse = fallback >= 2 && prev_state.params.is_some();
            let (metric, l_try) = match prev_state.params {
                Some(p) if reuse => (prev_state.metric.clone(), lipschitz.max(p.lipschitz)),
                _ => (candidate.clone(), lipschitz),
            };
            let (semiconvex, modulus) = self.semiconvexity(group, &metric);
            // L must exceed σm; raising L keeps the quadratic bound valid
            let l_try = if semiconvex && l_try <= modulus {
                modulus * (1.0 + 1e-9) + f64::MIN_POSITIVE
            } else {
                l_try
            };
            let (beta, gamma) = match prev_state.params {
                Some(p) if fallback >= 1 => {
                    let room = metric.norm_sq_unchecked(&d_prev_vec);
                    let budget = if room > 0.0 {
                        p.delta * prev_state.metric.norm_sq_unchecked(&d_prev_vec) / room
                    } else {
                        f64::INFINITY
                    };
                    match relax_inertia(budget, beta_cfg, c, c_floor, l_try, semiconvex, modulus) {
                        Some(bg) => bg,
                        None if fallback < 2 => {
                            fallback = 2;
                            continue;
                        }
                        None => {
                            return Err(Error::InfeasibleStep(format!(
                                "δ compatibility cannot be restored on group {group}"
                            )))
                        }
                    }
                }
                _ => (beta_cfg, c),
            };
            let params = StepParams::targeting(beta, l_try, semiconvex, modulus, gamma)?;
            if params.alpha < self.cfg.alpha_min {
                return Err(Error::InfeasibleStep(format!(
                    "step size {} fell below α_min = {}",
                    params.alpha, self.cfg.alpha_min
                )));
            }
            if let Some(p) = prev_state.params {
                if !delta_guard(
                    params.delta,
                    &metric,
                    p.delta,
                    &prev_state.metric,
                    &d_prev_vec,
                ) {
                    if fallback >= 2 {
                        return Err(Error::InfeasibleStep(format!(
                            "δ compatibility cannot be restored on group {group}"
                        )));
                    }
                    fallback += 1;
                    continue;
                }
            }

            let anchor: Vec<f64> = match self.cfg.inertia_form {
                InertiaForm::MetricWeighted => x_cur
                    .iter()
                    .zip(&d_prev_vec)
                    .map(|(x, d)| x + params.beta * d)
                    .collect(),
                InertiaForm::Euclidean => x_cur
                    .iter()
                    .zip(d_prev_vec.iter().zip(metric.entries()))
                    .map(|(x, (d, a))| x + params.beta * d / a)
                    .collect(),
            };
            let x_new_block = self.prox_group(group, &grad_old, &anchor, params.alpha, &metric)?;
            let mut x_new = self.x.clone();
            x_new[range.clone()].copy_from_slice(&x_new_block);
            let f_new = smooth.value(&x_new);
            let step: Vec<f64> = x_new_block.iter().zip(&x_cur).map(|(a, b)| a - b).collect();
            let bound = QuadraticBound {
                f_old,
                slope: grad_old.iter().zip(&step).map(|(g, s)| g * s).sum(),
                dist_sq: metric.norm_sq_unchecked(&step),
                f_new,
            };
            if bound.holds(params.lipschitz) {
                break (params, metric, x_new_block, x_new, f_new);
            }
            lipschitz = backtrack_lipschitz(&bound, params.lipschitz)?;
            backtracks += 1;
            log::debug!(
                "iteration {}: backtracking on group {group} raised L from {} to {lipschitz}",
                self.n + 1,
                params.lipschitz
            );
        };

        let objective = f_new
            + (0..self.problem.num_blocks())
                .map(|b| {
                    self.problem
                        .term(b)
                        .value(&x_new[self.problem.block_range(b)])
                })
                .sum::<f64>();
        if !objective.is_finite() {
            return Err(Error::OutsideDomain(objective));
        }

        let grad_new = self.group_gradient(&x_new, group)?;
        let residual = subgradient_residual(
            &x_new_block,
            &x_cur,
            &x_prev,
            &grad_old,
            &grad_new,
            params.alpha,
            params.beta,
            &metric,
            self.cfg.inertia_form,
        );
        let residual_norm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();

        let others: f64 = self
            .memory
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != group)
            .map(|(_, m)| m.penalty)
            .sum();
        let penalty_before = params.delta * metric.norm_sq_unchecked(&d_prev_vec);
        let d_next_vec: Vec<f64> = x_new_block.iter().zip(&x_cur).map(|(a, b)| a - b).collect();
        let penalty_after = params.delta * metric.norm_sq_unchecked(&d_next_vec);
        let before = LyapunovValue::new(self.objective, others + penalty_before);
        let after = LyapunovValue::new(objective, others + penalty_after);
        let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();

        self.n += 1;
        let certificate = StepCertificate {
            iteration: self.n,
            block: group,
            before,
            after,
            d_prev: norm(&d_prev_vec),
            d_next: norm(&d_next_vec),
            residual_norm,
            alpha: params.alpha,
            beta: params.beta,
            lipschitz: params.lipschitz,
            gamma: params.gamma,
            sigma_a: metric.sigma_min(),
            a_max: metric.max_entry(),
            gamma_target: c_floor,
            alpha_min: self.cfg.alpha_min,
            metric_floor: self.cfg.metric_floor,
        };

        let state = &mut self.memory[group];
        state.previous = x_cur;
        state.metric = metric;
        state.params = Some(params);
        state.penalty = penalty_after;
        self.x = x_new;
        self.objective = objective;

        Ok(StepReport {
            certificate,
            params,
            fallback,
            backtracks,
            objective,
        })
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub x: Vec<f64>,
    pub initial_objective: f64,
    pub trace: Vec<TraceRecord>,
    /// Steps where the candidate metric failed the δ guard.
    pub fallbacks: usize,
    /// Total Lipschitz doublings.
    pub backtracks: usize,
}

/// Runs `cfg.max_iters` iterations from `x0`, passing every step to `monitor`.
pub fn run(
    problem: &BlockProblem,
    x0: Vec<f64>,
    cfg: &VariantConfig,
    monitor: &mut CertificateMonitor,
) -> Result<RunOutput> {
    let mut solver = Solver::new(problem, x0, cfg.clone())?;
    let initial_objective = solver.objective();
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut path_length = 0.0;
    let mut fallbacks = 0;
    let mut backtracks = 0;
    for _ in 0..cfg.max_iters {
        let report = solver.step()?;
        monitor.observe(&report.certificate)?;
        let cert = &report.certificate;
        path_length += cert.d_next;
        fallbacks += usize::from(report.fallback > 0);
        backtracks += report.backtracks;
        trace.push(TraceRecord {
            n: cert.iteration,
            h: cert.after.h,
            lyapunov: cert.after.total,
            d_n: cert.d_next,
            residual: cert.residual_norm,
            path_length,
            block: cert.block,
            alpha: report.params.alpha,
            beta: report.params.beta,
            lipschitz: report.params.lipschitz,
            delta: report.params.delta,
            gamma: report.params.gamma,
        });
    }
    Ok(RunOutput {
        x: solver.x,
        initial_objective,
        trace,
        fallbacks,
        backtracks,
    })
}
