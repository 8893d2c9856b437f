//! Ambrosio–Tortorelli inpainting.
//!
//! Given an image `I` known only where the mask `c` is one, find an image `w`
//! and an edge field `z` minimizing
//!
//! ```text
//! ½‖z ∘ D₁w‖² + ½‖z ∘ D₂w‖² + (γε/2)‖Dz‖² + (γ/4ε)‖z − 1‖²   s.t. wᵢ = Iᵢ where cᵢ = 1
//! ```
//!
//! with `D = (D₁; D₂)` forward differences. The smooth part couples `w` and
//! `z`; the nonsmooth part is the indicator of the mask constraint on `w` and
//! the quadratic penalty on `z`. For fixed `z` the problem is quadratic in
//! `w` and vice versa, and absolute row sums of the two block Hessians give
//! diagonal majorizers.

mod grid;

pub use grid::{dx_adjoint, dx_forward, dy_adjoint, dy_forward, Grid2D};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::metric::DiagonalMetric;
use crate::problem::{
    Block, BlockProblem, MaskedEquality, NonsmoothTerm, SmoothTerm, SquaredDistance,
};

/// Default edge weight `γ`.
pub const DEFAULT_GAMMA: f64 = 1.0 / 400.0;
/// Default phase-field width `ε`.
pub const DEFAULT_EPSILON: f64 = 0.1;
/// Default share of known pixels.
pub const DEFAULT_KNOWN_FRACTION: f64 = 0.1;

/// Identity-metric Lipschitz constant of the `w` block when `z ∈ [0, 1]`.
pub const LIPSCHITZ_W: f64 = 8.0;

/// Identity-metric Lipschitz constant of the `z` block when `w ∈ [0, 1]`.
pub fn lipschitz_z(gamma: f64, epsilon: f64) -> f64 {
    2.0 + 8.0 * gamma * epsilon
}

/// Smallest scale given to an all-zero majorizer before normalization.
const MIN_MAJORIZER: f64 = 1e-12;

fn checked_shape(a: &Grid2D, b: &Grid2D) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "grid shapes differ: {}×{} vs {}×{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

/// Absolute row sums of `D₁ᵀ diag(s) D₁ + D₂ᵀ diag(s) D₂`, `s = z²`.
pub fn metric_w(z: &Grid2D) -> Vec<f64> {
    metric_w_raw(z.width(), z.height(), z.data())
}

fn metric_w_raw(width: usize, height: usize, z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    for c in 0..width {
        for r in 0..height {
            let p = c * height + r;
            let s = z[p] * z[p];
            let mut acc = 0.0;
            if c + 1 < width {
                acc += s;
            }
            if c > 0 {
                acc += z[p - height] * z[p - height];
            }
            if r + 1 < height {
                acc += s;
            }
            if r > 0 {
                acc += z[p - 1] * z[p - 1];
            }
            // diagonal entry plus the equal-magnitude off-diagonals
            out[p] = 2.0 * acc;
        }
    }
    out
}

/// Absolute row sums of `diag((D₁w)²) + diag((D₂w)²) + γε DᵀD`.
pub fn metric_z(w: &Grid2D, gamma: f64, epsilon: f64) -> Vec<f64> {
    metric_z_raw(w.width(), w.height(), w.data(), gamma * epsilon)
}

fn metric_z_raw(width: usize, height: usize, w: &[f64], ge: f64) -> Vec<f64> {
    let n = w.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    grid::dx(width, height, w, &mut d1);
    grid::dy(width, height, w, &mut d2);
    let mut out = vec![0.0; n];
    for c in 0..width {
        for r in 0..height {
            let p = c * height + r;
            let links = grid::link_count(width, height, c, r) as f64;
            out[p] = d1[p] * d1[p] + d2[p] * d2[p] + ge * 2.0 * links;
        }
    }
    out
}

fn strictly_positive(mut raw: Vec<f64>) -> Vec<f64> {
    let scale = raw.iter().copied().fold(0.0, f64::max).max(MIN_MAJORIZER);
    let floor = scale * MIN_MAJORIZER;
    for v in &mut raw {
        *v = v.max(floor);
    }
    raw
}

/// The smooth coupling term `f(w, z)` on `x = (w, z)`.
#[derive(Debug, Clone)]
pub struct AtCoupling {
    width: usize,
    height: usize,
    gamma: f64,
    epsilon: f64,
}

impl AtCoupling {
    pub fn new(width: usize, height: usize, gamma: f64, epsilon: f64) -> Self {
        Self {
            width,
            height,
            gamma,
            epsilon,
        }
    }

    fn n(&self) -> usize {
        self.width * self.height
    }

    fn differences(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        grid::dx(self.width, self.height, u, &mut d1);
        grid::dy(self.width, self.height, u, &mut d2);
        (d1, d2)
    }

    /// `(D₁ᵀ diag(s) D₁ + D₂ᵀ diag(s) D₂) u`.
    fn weighted_laplacian(&self, u: &[f64], s: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = self.n();
        let (mut d1, mut d2) = self.differences(u);
        for p in 0..n {
            d1[p] *= s(p);
            d2[p] *= s(p);
        }
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        grid::dx_t(self.width, self.height, &d1, &mut a);
        grid::dy_t(self.width, self.height, &d2, &mut b);
        a.iter().zip(&b).map(|(p, q)| p + q).collect()
    }

    pub fn grad_w(&self, w: &[f64], z: &[f64]) -> Vec<f64> {
        self.weighted_laplacian(w, |p| z[p] * z[p])
    }

    pub fn grad_z(&self, w: &[f64], z: &[f64]) -> Vec<f64> {
        let (d1, d2) = self.differences(w);
        let ge = self.gamma * self.epsilon;
        let lap = self.weighted_laplacian(z, |_| 1.0);
        (0..self.n())
            .map(|p| (d1[p] * d1[p] + d2[p] * d2[p]) * z[p] + ge * lap[p])
            .collect()
    }
}

impl SmoothTerm for AtCoupling {
    fn value(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let (w, z) = x.split_at(n);
        let (w1, w2) = self.differences(w);
        let (z1, z2) = self.differences(z);
        let ge = self.gamma * self.epsilon;
        let mut total = 0.0;
        for p in 0..n {
            total += 0.5 * z[p] * z[p] * (w1[p] * w1[p] + w2[p] * w2[p]);
            total += 0.5 * ge * (z1[p] * z1[p] + z2[p] * z2[p]);
        }
        total
    }

    fn block_gradient(&self, x: &[f64], block: usize) -> Vec<f64> {
        let (w, z) = x.split_at(self.n());
        match block {
            0 => self.grad_w(w, z),
            _ => self.grad_z(w, z),
        }
    }

    fn lipschitz_hint(&self, block: usize) -> f64 {
        match block {
            0 => LIPSCHITZ_W,
            _ => lipschitz_z(self.gamma, self.epsilon),
        }
    }

    fn block_majorizer(&self, x: &[f64], block: usize) -> Option<Vec<f64>> {
        let (w, z) = x.split_at(self.n());
        let raw = match block {
            0 => metric_w_raw(self.width, self.height, z),
            _ => metric_z_raw(self.width, self.height, w, self.gamma * self.epsilon),
        };
        Some(strictly_positive(raw))
    }
}

/// `f(w) = ½ Σ sₚ ((D₁w)ₚ² + (D₂w)ₚ²)` for a fixed weight field `s`;
/// `s ≡ 1` is plain linear diffusion.
#[derive(Debug, Clone)]
pub struct WeightedDiffusion {
    width: usize,
    height: usize,
    weights: Vec<f64>,
}

impl WeightedDiffusion {
    pub fn new(width: usize, height: usize, weights: Vec<f64>) -> Result<Self> {
        check_dim(width * height, weights.len())?;
        Ok(Self {
            width,
            height,
            weights,
        })
    }

    /// Linear diffusion: the coupling term with `z ≡ 1`.
    pub fn linear(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            weights: vec![1.0; width * height],
        }
    }
}

impl SmoothTerm for WeightedDiffusion {
    fn value(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        grid::dx(self.width, self.height, x, &mut d1);
        grid::dy(self.width, self.height, x, &mut d2);
        (0..n)
            .map(|p| 0.5 * self.weights[p] * (d1[p] * d1[p] + d2[p] * d2[p]))
            .sum()
    }

    fn block_gradient(&self, x: &[f64], _block: usize) -> Vec<f64> {
        let coupling = AtCoupling::new(self.width, self.height, 0.0, 0.0);
        coupling.weighted_laplacian(x, |p| self.weights[p])
    }

    fn lipschitz_hint(&self, _block: usize) -> f64 {
        4.0 * 2.0 * self.weights.iter().copied().fold(0.0, f64::max)
    }

    fn block_majorizer(&self, _x: &[f64], _block: usize) -> Option<Vec<f64>> {
        let sqrt_w: Vec<f64> = self.weights.iter().map(|s| s.sqrt()).collect();
        Some(strictly_positive(metric_w_raw(
            self.width,
            self.height,
            &sqrt_w,
        )))
    }
}

/// Metric-weighted prox of the mask indicator: known pixels are reset to `I`,
/// free pixels take the step `yᵢ − α vᵢ / aᵢ`.
pub fn prox_mask(
    image: &Grid2D,
    mask: &Grid2D,
    v: &[f64],
    y: &[f64],
    alpha: f64,
    metric: &DiagonalMetric,
) -> Result<Grid2D> {
    checked_shape(image, mask)?;
    let term = MaskedEquality::new(
        image.data().to_vec(),
        mask.data().iter().map(|m| *m == 1.0).collect(),
    )?;
    Grid2D::new(
        image.width(),
        image.height(),
        term.prox(v, y, alpha, metric)?,
    )
}

/// Metric-weighted prox of `(γ/4ε)‖z − 1‖²`:
/// `zᵢ = (κ + aᵢyᵢ/α − vᵢ)/(κ + aᵢ/α)` with `κ = γ/(2ε)`.
pub fn prox_quad_z(
    gamma: f64,
    epsilon: f64,
    v: &[f64],
    y: &[f64],
    alpha: f64,
    metric: &DiagonalMetric,
) -> Result<Vec<f64>> {
    edge_penalty(gamma, epsilon, y.len()).prox(v, y, alpha, metric)
}

fn edge_penalty(gamma: f64, epsilon: f64, n: usize) -> SquaredDistance {
    SquaredDistance::new(gamma / (2.0 * epsilon), vec![1.0; n])
}

/// Mask with exactly `round(fraction · N)` known pixels drawn uniformly
/// without replacement.
pub fn random_mask(width: usize, height: usize, known_fraction: f64, seed: u64) -> Result<Grid2D> {
    if !(known_fraction > 0.0 && known_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "known fraction {known_fraction} must lie in (0, 1]"
        )));
    }
    let n = width * height;
    let count = ((known_fraction * n as f64).round() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![0.0; n];
    for i in rand::seq::index::sample(&mut rng, n, count) {
        data[i] = 1.0;
    }
    Grid2D::new(width, height, data)
}

/// A piecewise-constant test image in `[0, 1]`: a bright rectangle and a
/// mid-gray disk on a dark background.
pub fn phantom(width: usize, height: usize) -> Grid2D {
    let mut g = Grid2D::filled(width, height, 0.15);
    let (wf, hf) = (width as f64, height as f64);
    for c in 0..width {
        for r in 0..height {
            let (x, y) = ((c as f64 + 0.5) / wf, (r as f64 + 0.5) / hf);
            if (0.15..0.55).contains(&x) && (0.2..0.7).contains(&y) {
                g.set(r, c, 0.85);
            }
            if (x - 0.65).powi(2) + (y - 0.6).powi(2) < 0.06 {
                g.set(r, c, 0.5);
            }
        }
    }
    g
}

/// How unknown pixels of `w⁰` are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageFill {
    /// Zero, i.e. `w⁰ = I ∘ c`.
    Zero,
    /// The mean of the known pixels.
    #[default]
    KnownMean,
}

/// Starting point of the solvers: known pixels keep their values, the rest
/// is filled per `fill`, and the edge field starts constant at `edges`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Initialization {
    pub fill: ImageFill,
    pub edges: f64,
}

impl Default for Initialization {
    fn default() -> Self {
        Self {
            fill: ImageFill::KnownMean,
            edges: 0.0,
        }
    }
}

/// An inpainting instance: image, mask and model parameters.
#[derive(Debug, Clone)]
pub struct InpaintProblem {
    pub image: Grid2D,
    pub mask: Grid2D,
    pub gamma: f64,
    pub epsilon: f64,
}

impl InpaintProblem {
    pub fn new(image: Grid2D, mask: Grid2D, gamma: f64, epsilon: f64) -> Result<Self> {
        checked_shape(&image, &mask)?;
        if let Some(bad) = mask.data().iter().find(|m| **m != 0.0 && **m != 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mask entries must be 0 or 1, found {bad}"
            )));
        }
        if !(gamma > 0.0 && epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "γ = {gamma} and ε = {epsilon} must be positive"
            )));
        }
        Ok(Self {
            image,
            mask,
            gamma,
            epsilon,
        })
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn pixels(&self) -> usize {
        self.image.len()
    }

    pub fn coupling(&self) -> AtCoupling {
        AtCoupling::new(self.width(), self.height(), self.gamma, self.epsilon)
    }

    fn mask_term(&self) -> MaskedEquality {
        MaskedEquality {
            values: self.image.data().to_vec(),
            mask: self.mask.data().iter().map(|m| *m == 1.0).collect(),
        }
    }

    /// `f(w, z) + g₁(w) + g₂(z)`; `+∞` when `w` violates the mask.
    pub fn at_objective(&self, w: &Grid2D, z: &Grid2D) -> Result<f64> {
        checked_shape(&self.image, w)?;
        checked_shape(&self.image, z)?;
        let mut x = w.data().to_vec();
        x.extend_from_slice(z.data());
        Ok(self.coupling().value(&x)
            + self.mask_term().value(w.data())
            + edge_penalty(self.gamma, self.epsilon, self.pixels()).value(z.data()))
    }

    /// The two-block problem on `x = (w, z)`.
    pub fn block_problem(&self) -> BlockProblem {
        let n = self.pixels();
        BlockProblem::new(
            self.coupling(),
            vec![
                Block::new(n, self.mask_term()),
                Block::new(n, edge_penalty(self.gamma, self.epsilon, n)),
            ],
        )
        .expect("both blocks are non-empty")
    }

    /// Mean of the known pixels, zero if there are none.
    pub fn known_mean(&self) -> f64 {
        let (sum, count) = self
            .image
            .data()
            .iter()
            .zip(self.mask.data())
            .filter(|(_, c)| **c == 1.0)
            .fold((0.0, 0usize), |(s, k), (i, _)| (s + i, k + 1));
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    /// The default starting point, see [`Initialization`].
    pub fn initial_point(&self) -> Vec<f64> {
        self.initial_point_with(&Initialization::default())
    }

    pub fn initial_point_with(&self, init: &Initialization) -> Vec<f64> {
        let fill = match init.fill {
            ImageFill::Zero => 0.0,
            ImageFill::KnownMean => self.known_mean(),
        };
        let mut x: Vec<f64> = self
            .image
            .data()
            .iter()
            .zip(self.mask.data())
            .map(|(i, c)| if *c == 1.0 { *i } else { fill })
            .collect();
        x.extend(std::iter::repeat_n(init.edges, self.pixels()));
        x
    }

    /// Splits a stacked `(w, z)` vector into its two grids.
    pub fn split(&self, x: &[f64]) -> Result<(Grid2D, Grid2D)> {
        check_dim(2 * self.pixels(), x.len())?;
        let (w, z) = x.split_at(self.pixels());
        Ok((
            Grid2D::new(self.width(), self.height(), w.to_vec())?,
            Grid2D::new(self.width(), self.height(), z.to_vec())?,
        ))
    }
}
