use crate::grid::{FaceVectorField, Grid, SideBcs};

/// `coef * x[dof] + constant`, the value of a velocity face expressed in
/// terms of the unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Affine {
    pub dof: Option<usize>,
    pub coef: f64,
    pub constant: f64,
}

impl Affine {
    fn known(v: f64) -> Self {
        Self { dof: None, coef: 0.0, constant: v }
    }

    fn dof(d: Option<usize>) -> Self {
        match d {
            Some(_) => Self { dof: d, coef: 1.0, constant: 0.0 },
            None => Self::known(0.0),
        }
    }

    /// Ghost through a wall with tangential speed `w`: `2w - inner`.
    fn reflected(inner: Affine, w: f64) -> Self {
        Self {
            dof: inner.dof,
            coef: -inner.coef,
            constant: 2.0 * w - inner.constant,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.dof.map_or(0.0, |d| self.coef * x[d])
    }
}

/// Numbering of the velocity unknowns on the staggered grid. Wall-normal
/// faces carry no unknown; in a periodic direction the last face aliases
/// the first.
#[derive(Debug, Clone)]
pub struct VelocityLayout {
    pub grid: Grid,
    pub bc: SideBcs,
    u_dof: Vec<Option<usize>>,
    v_dof: Vec<Option<usize>>,
    pub n_u: usize,
    pub n: usize,
}

impl VelocityLayout {
    pub fn new(grid: Grid, bc: &SideBcs) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let px = bc.periodic_in_x();
        let py = bc.periodic_in_y();
        let mut u_dof = vec![None; (nx + 1) * ny];
        let mut n = 0;
        for j in 0..ny {
            for i in 0..=nx {
                let wall = !px && (i == 0 || i == nx);
                if !wall && !(px && i == nx) {
                    u_dof[j * (nx + 1) + i] = Some(n);
                    n += 1;
                }
            }
            if px {
                u_dof[j * (nx + 1) + nx] = u_dof[j * (nx + 1)];
            }
        }
        let n_u = n;
        let mut v_dof = vec![None; if grid.is_1d() { 0 } else { nx * (ny + 1) }];
        if !grid.is_1d() {
            for j in 0..=ny {
                for i in 0..nx {
                    let wall = !py && (j == 0 || j == ny);
                    if !wall && !(py && j == ny) {
                        v_dof[j * nx + i] = Some(n);
                        n += 1;
                    }
                }
            }
            if py {
                for i in 0..nx {
                    v_dof[ny * nx + i] = v_dof[i];
                }
            }
        }
        Self { grid, bc: *bc, u_dof, v_dof, n_u, n }
    }

    pub fn u_dof(&self, i: usize, j: usize) -> Option<usize> {
        self.u_dof[j * (self.grid.nx + 1) + i]
    }

    pub fn v_dof(&self, i: usize, j: usize) -> Option<usize> {
        self.v_dof[j * self.grid.nx + i]
    }

    /// u at face `(i, j)`; `j` may leave `0..ny` by one, `i` may wrap when periodic.
    pub(crate) fn u_affine(&self, i: isize, j: isize) -> Affine {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let i = if i < 0 { i + nx } else if i > nx { i - nx } else { i };
        if j < 0 {
            if self.bc.periodic_in_y() {
                return self.u_affine(i, j + ny);
            }
            return Affine::reflected(self.u_affine(i, 0), self.bc.bottom.wall_speed());
        }
        if j >= ny {
            if self.bc.periodic_in_y() {
                return self.u_affine(i, j - ny);
            }
            return Affine::reflected(self.u_affine(i, ny - 1), self.bc.top.wall_speed());
        }
        Affine::dof(self.u_dof(i as usize, j as usize))
    }

    /// v at face `(i, j)`; `i` may leave `0..nx` by one, `j` may wrap when periodic.
    pub(crate) fn v_affine(&self, i: isize, j: isize) -> Affine {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let j = if j < 0 { j + ny } else if j > ny { j - ny } else { j };
        if i < 0 {
            if self.bc.periodic_in_x() {
                return self.v_affine(i + nx, j);
            }
            return Affine::reflected(self.v_affine(0, j), self.bc.left.wall_speed());
        }
        if i >= nx {
            if self.bc.periodic_in_x() {
                return self.v_affine(i - nx, j);
            }
            return Affine::reflected(self.v_affine(nx - 1, j), self.bc.right.wall_speed());
        }
        Affine::dof(self.v_dof(i as usize, j as usize))
    }

    pub fn gather(&self, f: &FaceVectorField) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (k, d) in self.u_dof.iter().enumerate() {
            if let Some(d) = d {
                x[*d] = f.u[k];
            }
        }
        for (k, d) in self.v_dof.iter().enumerate() {
            if let Some(d) = d {
                x[*d] = f.v[k];
            }
        }
        x
    }

    pub fn scatter(&self, x: &[f64]) -> FaceVectorField {
        let mut f = FaceVectorField::zeros(self.grid);
        for (k, d) in self.u_dof.iter().enumerate() {
            f.u[k] = d.map_or(0.0, |d| x[d]);
        }
        for (k, d) in self.v_dof.iter().enumerate() {
            f.v[k] = d.map_or(0.0, |d| x[d]);
        }
        f
    }

    /// Zeroes wall-normal faces and copies aliased periodic faces.
    pub fn impose_walls(&self, f: &mut FaceVectorField) {
        *f = self.scatter(&self.gather(f));
    }
}
