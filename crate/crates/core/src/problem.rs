//! Composite objectives `h(x) = f(x) + Σᵢ gᵢ(xᵢ)` over a block partition of
//! the coordinates.
//!
//! `f` is smooth and exposes block gradients; each `gᵢ` is "simple": its
//! metric-weighted proximal subproblem
//!
//! ```text
//! argmin_x  gᵢ(x) + ⟨v, x⟩ + (1/2α)‖x − y‖²_A
//! ```
//!
//! has a closed-form global minimizer.

use std::ops::Range;

use crate::error::{check_dim, Error, Result};
use crate::metric::DiagonalMetric;

/// The smooth part `f` of the objective.
pub trait SmoothTerm: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Partial gradient `∇_{x_block} f(x)`; its length equals the block dimension.
    fn block_gradient(&self, x: &[f64], block: usize) -> Vec<f64>;

    /// A Lipschitz constant of the block gradient, used for identity-metric steps.
    fn lipschitz_hint(&self, block: usize) -> f64;

    /// Raw positive diagonal `d` such that `diag(d)` majorizes the block Hessian
    /// at `x`. `None` means no variable metric is available for this block.
    fn block_majorizer(&self, _x: &[f64], _block: usize) -> Option<Vec<f64>> {
        None
    }
}

/// A proper, prox-simple nonsmooth term `g` acting on one block.
pub trait NonsmoothTerm: Send + Sync {
    /// Extended-real value; `+∞` outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    /// Global minimizer of `g(x) + ⟨v, x⟩ + (1/2α)‖x − y‖²_A`.
    fn prox(&self, v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Result<Vec<f64>>;

    /// Whether `g − (m/2)‖·‖²_A` is convex for some finite `m`.
    fn is_semiconvex(&self) -> bool {
        false
    }

    /// Semi-convexity modulus with respect to `metric`. Only meaningful when
    /// [`is_semiconvex`](Self::is_semiconvex) holds.
    fn modulus(&self, _metric: &DiagonalMetric) -> f64 {
        0.0
    }
}

fn check_prox_args(v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Result<()> {
    check_dim(metric.dim(), v.len())?;
    check_dim(metric.dim(), y.len())?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InfeasibleStep(format!(
            "proximal step needs a positive finite step size, got {alpha}"
        )));
    }
    Ok(())
}

/// Unconstrained minimizer `y − α vᵢ / aᵢ` of the linearized quadratic model.
fn forward_point(v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Vec<f64> {
    metric
        .entries()
        .iter()
        .zip(v.iter().zip(y))
        .map(|(a, (vi, yi))| yi - alpha * vi / a)
        .collect()
}

/// Largest `m` such that `(weight/2)‖x − t‖² − (m/2)‖x‖²_A` is convex,
/// i.e. `min_i weight / aᵢ`.
pub fn semiconvex_modulus_quadratic(weight: f64, metric: &DiagonalMetric) -> f64 {
    if weight >= 0.0 {
        weight / metric.max_entry()
    } else {
        weight / metric.sigma_min()
    }
}

/// `g ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroTerm;

impl NonsmoothTerm for ZeroTerm {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn prox(&self, v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Result<Vec<f64>> {
        check_prox_args(v, y, alpha, metric)?;
        Ok(forward_point(v, y, alpha, metric))
    }

    fn is_semiconvex(&self) -> bool {
        true
    }
}

/// `g(x) = (weight/2)‖x − center‖²`. A negative weight gives a semi-convex
/// (concave) term whose prox exists only for small enough steps.
#[derive(Debug, Clone)]
pub struct SquaredDistance {
    pub weight: f64,
    pub center: Vec<f64>,
}

impl SquaredDistance {
    pub fn new(weight: f64, center: Vec<f64>) -> Self {
        Self { weight, center }
    }
}

impl NonsmoothTerm for SquaredDistance {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.weight
            * x.iter()
                .zip(&self.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
    }

    fn prox(&self, v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Result<Vec<f64>> {
        check_prox_args(v, y, alpha, metric)?;
        check_dim(metric.dim(), self.center.len())?;
        let k = self.weight;
        metric
            .entries()
            .iter()
            .zip(v.iter().zip(y.iter().zip(&self.center)))
            .map(|(a, (vi, (yi, ti)))| {
                let curvature = k + a / alpha;
                if curvature <= 0.0 {
                    return Err(Error::ProxUnbounded { alpha });
                }
                Ok((k * ti + a * yi / alpha - vi) / curvature)
            })
            .collect()
    }

    fn is_semiconvex(&self) -> bool {
        true
    }

    fn modulus(&self, metric: &DiagonalMetric) -> f64 {
        semiconvex_modulus_quadratic(self.weight, metric)
    }
}

/// Indicator of the affine set `{x : xᵢ = valuesᵢ wherever maskᵢ}`.
#[derive(Debug, Clone)]
pub struct MaskedEquality {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl MaskedEquality {
    pub fn new(values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        check_dim(values.len(), mask.len())?;
        Ok(Self { values, mask })
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mask.iter().zip(&self.values))
            .map(|(xi, (&m, vi))| if m { *vi } else { *xi })
            .collect()
    }
}

impl NonsmoothTerm for MaskedEquality {
    fn value(&self, x: &[f64]) -> f64 {
        let feasible = x
            .iter()
            .zip(self.mask.iter().zip(&self.values))
            .all(|(xi, (&m, vi))| !m || xi == vi);
        if feasible {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Result<Vec<f64>> {
        check_prox_args(v, y, alpha, metric)?;
        check_dim(metric.dim(), self.values.len())?;
        Ok(self.project(&forward_point(v, y, alpha, metric)))
    }

    fn is_semiconvex(&self) -> bool {
        true
    }
}

/// `g(x) = λ‖x‖₁`.
#[derive(Debug, Clone, Copy)]
pub struct L1Norm {
    pub lambda: f64,
}

impl NonsmoothTerm for L1Norm {
    fn value(&self, x: &[f64]) -> f64 {
        self.lambda * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Result<Vec<f64>> {
        check_prox_args(v, y, alpha, metric)?;
        let u = forward_point(v, y, alpha, metric);
        Ok(u.iter()
            .zip(metric.entries())
            .map(|(ui, a)| {
                let t = self.lambda * alpha / a;
                ui.signum() * (ui.abs() - t).max(0.0)
            })
            .collect())
    }

    fn is_semiconvex(&self) -> bool {
        true
    }
}

/// `g(x) = λ·#{i : xᵢ ≠ 0}`, nonconvex and not semi-convex.
#[derive(Debug, Clone, Copy)]
pub struct L0Penalty {
    pub lambda: f64,
}

impl NonsmoothTerm for L0Penalty {
    fn value(&self, x: &[f64]) -> f64 {
        self.lambda * x.iter().filter(|v| **v != 0.0).count() as f64
    }

    fn prox(&self, v: &[f64], y: &[f64], alpha: f64, metric: &DiagonalMetric) -> Result<Vec<f64>> {
        check_prox_args(v, y, alpha, metric)?;
        let u = forward_point(v, y, alpha, metric);
        // hard threshold: keep uᵢ only when it pays for the λ charge
        Ok(u.iter()
            .zip(metric.entries())
            .map(|(ui, a)| {
                if 0.5 * a / alpha * ui * ui > self.lambda {
                    *ui
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// `f(x) = ½ xᵀQx − bᵀx` with a dense symmetric `Q`.
#[derive(Debug, Clone)]
pub struct DenseQuadratic {
    n: usize,
    q: Vec<f64>,
    b: Vec<f64>,
    blocks: Vec<Range<usize>>,
}

impl DenseQuadratic {
    /// `q` is row-major `n × n`; `block_dims` partitions `0..n`.
    pub fn new(q: Vec<f64>, b: Vec<f64>, block_dims: &[usize]) -> Result<Self> {
        let n = b.len();
        check_dim(n * n, q.len())?;
        check_dim(n, block_dims.iter().sum())?;
        let mut blocks = Vec::with_capacity(block_dims.len());
        let mut start = 0;
        for &d in block_dims {
            blocks.push(start..start + d);
            start += d;
        }
        Ok(Self { n, q, b, blocks })
    }

    pub fn hessian_entry(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.q[i * self.n..(i + 1) * self.n]
            .iter()
            .zip(x)
            .map(|(a, b)| a * b)
            .sum()
    }

    fn block_abs_row_sums(&self, block: usize) -> Vec<f64> {
        let r = self.blocks[block].clone();
        r.clone()
            .map(|i| r.clone().map(|j| self.hessian_entry(i, j).abs()).sum())
            .collect()
    }
}

impl SmoothTerm for DenseQuadratic {
    fn value(&self, x: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| 0.5 * x[i] * self.row_dot(i, x) - self.b[i] * x[i])
            .sum()
    }

    fn block_gradient(&self, x: &[f64], block: usize) -> Vec<f64> {
        self.blocks[block]
            .clone()
            .map(|i| self.row_dot(i, x) - self.b[i])
            .collect()
    }

    fn lipschitz_hint(&self, block: usize) -> f64 {
        self.block_abs_row_sums(block)
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn block_majorizer(&self, _x: &[f64], block: usize) -> Option<Vec<f64>> {
        Some(
            self.block_abs_row_sums(block)
                .into_iter()
                .map(|v| v.max(f64::MIN_POSITIVE))
                .collect(),
        )
    }
}

/// One block of the partition together with its nonsmooth term.
pub struct Block {
    pub dim: usize,
    pub term: Box<dyn NonsmoothTerm>,
}

impl Block {
    pub fn new(dim: usize, term: impl NonsmoothTerm + 'static) -> Self {
        Self {
            dim,
            term: Box::new(term),
        }
    }
}

/// `h(x) = f(x) + Σᵢ gᵢ(xᵢ)` with the coordinates split into consecutive blocks.
pub struct BlockProblem {
    smooth: Box<dyn SmoothTerm>,
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

impl BlockProblem {
    pub fn new(smooth: impl SmoothTerm + 'static, blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidConfig(
                "a problem needs at least one block".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in &blocks {
            if b.dim == 0 {
                return Err(Error::InvalidConfig("blocks must be non-empty".into()));
            }
            offsets.push(offsets.last().unwrap() + b.dim);
        }
        Ok(Self {
            smooth: Box::new(smooth),
            blocks,
            offsets,
        })
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn smooth(&self) -> &dyn SmoothTerm {
        self.smooth.as_ref()
    }

    pub fn term(&self, block: usize) -> &dyn NonsmoothTerm {
        self.blocks[block].term.as_ref()
    }

    /// `h(x)`; may be `+∞`. A `−∞` or NaN value means the objective is not proper.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let mut total = self.smooth.value(x);
        for (j, b) in self.blocks.iter().enumerate() {
            total += b.term.value(&x[self.block_range(j)]);
        }
        if total.is_nan() || total == f64::NEG_INFINITY {
            return Err(Error::ImproperObjective(total));
        }
        Ok(total)
    }

    pub fn block_gradient(&self, x: &[f64], block: usize) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let g = self.smooth.block_gradient(x, block);
        check_dim(self.blocks[block].dim, g.len())?;
        Ok(g)
    }
}
