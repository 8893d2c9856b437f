use crate::error::{check_dim, Result};

/// A scalar field on a `height × width` pixel grid, stored column by column:
/// pixel `(row, col)` lives at `col * height + row`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Grid2D {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(width * height, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds a grid from row-major samples (the raster order of image files).
    pub fn from_row_major(width: usize, height: usize, rows: &[f64]) -> Result<Self> {
        check_dim(width * height, rows.len())?;
        let mut data = vec![0.0; rows.len()];
        for r in 0..height {
            for c in 0..width {
                data[c * height + r] = rows[r * width + c];
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut rows = Vec::with_capacity(self.data.len());
        for r in 0..self.height {
            for c in 0..self.width {
                rows.push(self.get(r, c));
            }
        }
        rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.height + row]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.height + row] = value;
    }

    pub fn same_shape(&self, other: &Grid2D) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn with_data(&self, data: Vec<f64>) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

// Stencil kernels on column-stacked slices. Forward differences across the
// image boundary are zero.

pub(crate) fn dx(width: usize, height: usize, u: &[f64], out: &mut [f64]) {
    for c in 0..width {
        for r in 0..height {
            let p = c * height + r;
            out[p] = if c + 1 < width {
                u[p + height] - u[p]
            } else {
                0.0
            };
        }
    }
}

pub(crate) fn dy(width: usize, height: usize, u: &[f64], out: &mut [f64]) {
    for c in 0..width {
        for r in 0..height {
            let p = c * height + r;
            out[p] = if r + 1 < height { u[p + 1] - u[p] } else { 0.0 };
        }
    }
}

pub(crate) fn dx_t(width: usize, height: usize, v: &[f64], out: &mut [f64]) {
    for c in 0..width {
        for r in 0..height {
            let p = c * height + r;
            let from_left = if c > 0 { v[p - height] } else { 0.0 };
            let own = if c + 1 < width { v[p] } else { 0.0 };
            out[p] = from_left - own;
        }
    }
}

pub(crate) fn dy_t(width: usize, height: usize, v: &[f64], out: &mut [f64]) {
    for c in 0..width {
        for r in 0..height {
            let p = c * height + r;
            let from_up = if r > 0 { v[p - 1] } else { 0.0 };
            let own = if r + 1 < height { v[p] } else { 0.0 };
            out[p] = from_up - own;
        }
    }
}

/// Number of forward-difference links (right, left, down, up) touching each pixel.
pub(crate) fn link_count(width: usize, height: usize, col: usize, row: usize) -> usize {
    usize::from(col + 1 < width)
        + usize::from(col > 0)
        + usize::from(row + 1 < height)
        + usize::from(row > 0)
}

/// Horizontal forward differences `D₁g`.
pub fn dx_forward(g: &Grid2D) -> Grid2D {
    let mut out = vec![0.0; g.len()];
    dx(g.width, g.height, &g.data, &mut out);
    g.with_data(out)
}

/// Vertical forward differences `D₂g`.
pub fn dy_forward(g: &Grid2D) -> Grid2D {
    let mut out = vec![0.0; g.len()];
    dy(g.width, g.height, &g.data, &mut out);
    g.with_data(out)
}

/// `D₁ᵀv`.
pub fn dx_adjoint(v: &Grid2D) -> Grid2D {
    let mut out = vec![0.0; v.len()];
    dx_t(v.width, v.height, &v.data, &mut out);
    v.with_data(out)
}

/// `D₂ᵀv`.
pub fn dy_adjoint(v: &Grid2D) -> Grid2D {
    let mut out = vec![0.0; v.len()];
    dy_t(v.width, v.height, &v.data, &mut out);
    v.with_data(out)
}
