//! Diagonal metrics `A` with `0 < A ⪯ I`.
//!
//! A metric induces the weighted inner product `⟨x, y⟩_A = Σ aᵢ xᵢ yᵢ` and the
//! norm `‖x‖_A`. Its smallest entry `ς(A)` is the largest constant with
//! `‖x‖²_A ≥ ς(A)‖x‖²`, which is the factor that converts metric-weighted
//! descent into Euclidean descent in the certificates.

use std::ops::Range;

use crate::error::{check_dim, Error, Result};

/// Default lower bound on metric entries.
pub const DEFAULT_FLOOR: f64 = 1e-3;

/// A positive diagonal matrix bounded above by the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    diag: Vec<f64>,
}

impl DiagonalMetric {
    /// Builds a metric from its diagonal. Every entry must lie in `(0, 1]`.
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        for (index, &value) in diag.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::NonPositiveMetric { index, value });
            }
        }
        Ok(Self { diag })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            diag: vec![1.0; dim],
        }
    }

    /// Scales a raw positive diagonal majorizer into a metric `A ⪯ I`.
    ///
    /// Returns the metric together with the scale `L = max rawᵢ`, so that
    /// `L·A` dominates `diag(raw)` entrywise. Entries below `floor` are raised
    /// to `floor`, which only strengthens the majorization.
    pub fn normalize(raw: &[f64], floor: f64) -> Result<(Self, f64)> {
        if !(floor > 0.0 && floor < 1.0) {
            return Err(Error::InvalidFloor(floor));
        }
        for (index, &value) in raw.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveMetric { index, value });
            }
        }
        let scale = raw.iter().copied().fold(0.0_f64, f64::max);
        let diag = raw.iter().map(|&r| (r / scale).max(floor)).collect();
        Ok((Self { diag }, scale))
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }

    /// `‖v‖²_A = Σ aᵢ vᵢ²`.
    pub fn norm_sq(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        Ok(self.norm_sq_unchecked(v))
    }

    pub(crate) fn norm_sq_unchecked(&self, v: &[f64]) -> f64 {
        self.diag.iter().zip(v).map(|(a, x)| a * x * x).sum()
    }

    /// `‖u − v‖²_A`.
    pub fn dist_sq(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        check_dim(self.dim(), v.len())?;
        Ok(self
            .diag
            .iter()
            .zip(u.iter().zip(v))
            .map(|(a, (x, y))| a * (x - y) * (x - y))
            .sum())
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        check_dim(self.dim(), v.len())?;
        Ok(self
            .diag
            .iter()
            .zip(u.iter().zip(v))
            .map(|(a, (x, y))| a * x * y)
            .sum())
    }

    /// `ς(A)`: the smallest diagonal entry, which is the smallest eigenvalue.
    pub fn sigma_min(&self) -> f64 {
        self.diag.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest entry, equal to the operator norm `‖A‖`.
    pub fn max_entry(&self) -> f64 {
        self.diag.iter().copied().fold(0.0, f64::max)
    }

    /// The principal sub-metric on a coordinate range.
    pub fn restrict(&self, range: Range<usize>) -> Self {
        Self {
            diag: self.diag[range].to_vec(),
        }
    }

    /// Block-diagonal composition of several metrics.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a DiagonalMetric>) -> Self {
        Self {
            diag: parts
                .into_iter()
                .flat_map(|m| m.diag.iter().copied())
                .collect(),
        }
    }
}
