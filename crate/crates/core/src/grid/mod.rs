//! Staggered (MAC) rectangular grid, field containers, boundary ghosts and
//! the second-order difference operators shared by the rest of the crate.
//!
//! Scalars live at cell centers, `u` on vertical faces and `v` on
//! horizontal faces. A grid with `ny == 1` is treated as one-dimensional:
//! every y-derivative vanishes.

mod boundary;
mod field;
mod ops;

pub use boundary::{Bc, BoundarySpec, SideBcs, Variable};
pub use field::{FaceVectorField, ScalarField};
pub use ops::{
    advect_conservative, divergence, face_average, gradient, gradient_homogeneous, laplacian,
    scalar_ghost,
};

use crate::error::{Error, Result};

/// Declarative grid description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GridSpec {
    pub fn unit_square(n: usize) -> Self {
        Self {
            nx: n,
            ny: n,
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    /// One-dimensional grid on `(x_min, x_max)` with `nx` cells.
    pub fn line(nx: usize, x_min: f64, x_max: f64) -> Self {
        Self {
            nx,
            ny: 1,
            x_min,
            x_max,
            y_min: 0.0,
            y_max: 1.0,
        }
    }
}

/// A validated uniform MAC grid. Cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub hx: f64,
    pub hy: f64,
}

pub fn make_grid(spec: GridSpec) -> Result<Grid> {
    if spec.nx == 0 || spec.ny == 0 {
        return Err(Error::Config(format!(
            "cell counts must be positive, got nx={} ny={}",
            spec.nx, spec.ny
        )));
    }
    let finite = [spec.x_min, spec.x_max, spec.y_min, spec.y_max]
        .iter()
        .all(|v| v.is_finite());
    if !finite || spec.x_max <= spec.x_min || spec.y_max <= spec.y_min {
        return Err(Error::Config(format!(
            "domain extents must be finite and ordered, got x=({}, {}) y=({}, {})",
            spec.x_min, spec.x_max, spec.y_min, spec.y_max
        )));
    }
    Ok(Grid {
        nx: spec.nx,
        ny: spec.ny,
        x_min: spec.x_min,
        x_max: spec.x_max,
        y_min: spec.y_min,
        y_max: spec.y_max,
        hx: (spec.x_max - spec.x_min) / spec.nx as f64,
        hy: (spec.y_max - spec.y_min) / spec.ny as f64,
    })
}

impl Grid {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            x_min: self.x_min,
            x_max: self.x_max,
            y_min: self.y_min,
            y_max: self.y_max,
        }
    }

    #[inline]
    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Area (length in 1D) of one cell.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        if self.is_1d() {
            self.hx
        } else {
            self.hx * self.hy
        }
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn xc(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.hx
    }

    #[inline]
    pub fn yc(&self, j: usize) -> f64 {
        self.y_min + (j as f64 + 0.5) * self.hy
    }

    /// x coordinate of the vertical face `i` (0..=nx).
    #[inline]
    pub fn xf(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.hx
    }

    /// y coordinate of the horizontal face `j` (0..=ny).
    #[inline]
    pub fn yf(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.hy
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.xc(i), self.yc(j))
    }

    /// The grid with every cell split in two along each active axis.
    pub fn refined(&self) -> Grid {
        let mut spec = self.spec();
        spec.nx *= 2;
        if !self.is_1d() {
            spec.ny *= 2;
        }
        make_grid(spec).expect("refinement of a valid grid is valid")
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }
}
