use super::Grid;

/// Cell-centered scalar, row-major with `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.cell_count()],
        }
    }

    /// Sample `f(x, y)` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.cell_count());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(grid.xc(i), grid.yc(j)));
            }
        }
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.cell_count(), "value count must equal nx*ny");
        Self { grid, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let nx = self.grid.nx;
        self.data[j * nx + i] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.grid.same_shape(&other.grid));
        Self {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Midpoint-rule integral over the domain.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Area-weighted discrete L2 norm.
    pub fn norm_l2(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn subtract_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|v| *v -= m);
    }
}

/// Face-centered vector field on the MAC grid.
///
/// `u` holds `(nx+1)*ny` values on vertical faces, `v` holds `nx*(ny+1)`
/// values on horizontal faces. In a periodic direction the two boundary
/// faces store the same value.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVectorField {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FaceVectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            u: vec![0.0; (grid.nx + 1) * grid.ny],
            v: vec![0.0; grid.nx * (grid.ny + 1)],
        }
    }

    /// Sample `fu` at vertical faces and `fv` at horizontal faces.
    pub fn from_fns(grid: Grid, fu: impl Fn(f64, f64) -> f64, fv: impl Fn(f64, f64) -> f64) -> Self {
        let mut f = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                f.u[j * (grid.nx + 1) + i] = fu(grid.xf(i), grid.yc(j));
            }
        }
        if !grid.is_1d() {
            for j in 0..=grid.ny {
                for i in 0..grid.nx {
                    f.v[j * grid.nx + i] = fv(grid.xc(i), grid.yf(j));
                }
            }
        }
        f
    }

    #[inline]
    pub fn u_index(&self, i: usize, j: usize) -> usize {
        j * (self.grid.nx + 1) + i
    }

    #[inline]
    pub fn v_index(&self, i: usize, j: usize) -> usize {
        j * self.grid.nx + i
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[j * (self.grid.nx + 1) + i]
    }

    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[j * self.grid.nx + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(self.v.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|v| v.is_finite())
    }

    pub fn zip_map(&self, other: &FaceVectorField, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            u: self.u.iter().zip(&other.u).map(|(&a, &b)| f(a, b)).collect(),
            v: self.v.iter().zip(&other.v).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Copy face 0 onto the duplicate face in each periodic direction.
    pub fn sync_periodic(&mut self, periodic_x: bool, periodic_y: bool) {
        let g = self.grid;
        if periodic_x {
            for j in 0..g.ny {
                let a = j * (g.nx + 1);
                self.u[a + g.nx] = self.u[a];
            }
        }
        if periodic_y && !g.is_1d() {
            for i in 0..g.nx {
                self.v[g.ny * g.nx + i] = self.v[i];
            }
        }
    }

    /// Cell-averaged components, used by writers.
    pub fn cell_averaged(&self) -> (ScalarField, ScalarField) {
        let g = self.grid;
        let mut cu = ScalarField::zeros(g);
        let mut cv = ScalarField::zeros(g);
        for j in 0..g.ny {
            for i in 0..g.nx {
                cu.set(i, j, 0.5 * (self.u_at(i, j) + self.u_at(i + 1, j)));
                if !g.is_1d() {
                    cv.set(i, j, 0.5 * (self.v_at(i, j) + self.v_at(i, j + 1)));
                }
            }
        }
        (cu, cv)
    }
}
