use crate::{Error, Result};

/// Uniform partition of `[a, b]` into `n_cells` cells of width `dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformMesh {
    a: f64,
    b: f64,
    n_cells: usize,
    dx: f64,
}

impl UniformMesh {
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::config(format!("mesh needs a < b, got [{a}, {b}]")));
        }
        if n_cells < 2 {
            return Err(Error::config(format!("mesh needs at least 2 cells, got {n_cells}")));
        }
        Ok(Self {
            a,
            b,
            n_cells,
            dx: (b - a) / n_cells as f64,
        })
    }

    /// Builds the mesh whose cell width is closest to `dx`.
    pub fn with_spacing(a: f64, b: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::config(format!("mesh spacing must be positive, got {dx}")));
        }
        let n = ((b - a) / dx).round();
        if !(n >= 2.0) {
            return Err(Error::config(format!("spacing {dx} too coarse for [{a}, {b}]")));
        }
        Self::new(a, b, n as usize)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Mesh vertex `j`; the last vertex is `b` itself rather than `a + N·dx`.
    pub fn vertex(&self, j: usize) -> f64 {
        if j == self.n_cells {
            self.b
        } else {
            self.a + j as f64 * self.dx
        }
    }

    /// Cell containing `x`, and the local coordinate in `[0, 1]`.
    ///
    /// A point sitting on an interior vertex belongs to the cell on its left;
    /// `x = a` belongs to cell 0.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.a) / self.dx;
        let cell = (s.ceil() as isize - 1).clamp(0, self.n_cells as isize - 1) as usize;
        let xi = (x - self.vertex(cell)) / self.dx;
        (cell, xi)
    }

    /// Maps `x` into `[a, b)` modulo the mesh length.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length();
        let y = self.a + (x - self.a).rem_euclid(l);
        if y >= self.b {
            self.a
        } else {
            y
        }
    }

    pub fn same_as(&self, other: &UniformMesh) -> bool {
        self.n_cells == other.n_cells && self.a == other.a && self.b == other.b
    }
}
