//! Proximal splitting for `min f(x) + Σⱼ gⱼ(xⱼ)` with smooth `f` and
//! block-separable nonsmooth `gⱼ`.
//!
//! Eight solver variants combine inertia, a diagonal variable metric and
//! block-coordinate updates. Every step is checked at runtime against its
//! descent and relative-error certificates by a [`CertificateMonitor`].
//! The [`inpaint`] module applies the solvers to Ambrosio–Tortorelli image
//! inpainting, and [`experiment`] runs batches of variants on it.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod inpaint;
pub mod metric;
pub mod monitor;
pub mod pgm;
pub mod problem;
pub mod solver;
pub mod stepsize;
pub mod trace;

pub use error::{Error, Result};
pub use inpaint::{Grid2D, InpaintProblem};
pub use metric::DiagonalMetric;
pub use monitor::{CertificateMonitor, MonitorLevel, TraceRecord};
pub use problem::{Block, BlockProblem, NonsmoothTerm, SmoothTerm};
pub use solver::{run, RunOutput, Solver, Variant, VariantConfig};
