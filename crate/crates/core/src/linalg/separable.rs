use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::grid::{Bc, Grid, SideBcs};

/// Dense 1D cell-centered second-difference matrix with homogeneous
/// boundary closures: Neumann mirrors, Dirichlet reflects with a sign
/// change, Periodic wraps.
pub fn laplacian_1d(n: usize, h: f64, low: Bc, high: Bc) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let s = 1.0 / (h * h);
    for i in 0..n {
        if i > 0 {
            m[(i, i - 1)] += s;
            m[(i, i)] -= s;
        }
        if i + 1 < n {
            m[(i, i + 1)] += s;
            m[(i, i)] -= s;
        }
    }
    let closure = |m: &mut DMatrix<f64>, at: usize, other: usize, bc: Bc| match bc {
        Bc::Neumann | Bc::MovingWall(_) => {}
        Bc::Dirichlet(_) => m[(at, at)] -= 2.0 * s,
        Bc::Periodic => {
            m[(at, other)] += s;
            m[(at, at)] -= s;
        }
    };
    closure(&mut m, 0, n - 1, low);
    closure(&mut m, n - 1, 0, high);
    m
}

/// Fast diagonalization of `L = Lx (x) I + I (x) Ly` for the homogeneous
/// cell Laplacian. Any operator that is a function of `L` can be inverted
/// exactly by supplying its symbol.
#[derive(Debug, Clone)]
pub struct SeparableSolver {
    nx: usize,
    ny: usize,
    qx: DMatrix<f64>,
    lx: DVector<f64>,
    qy: DMatrix<f64>,
    ly: DVector<f64>,
}

impl SeparableSolver {
    pub fn new(grid: &Grid, bc: &SideBcs) -> Self {
        let ex = SymmetricEigen::new(laplacian_1d(grid.nx, grid.hx, bc.left, bc.right));
        let (qy, ly) = if grid.is_1d() {
            (DMatrix::identity(1, 1), DVector::zeros(1))
        } else {
            let ey = SymmetricEigen::new(laplacian_1d(grid.ny, grid.hy, bc.bottom, bc.top));
            (ey.eigenvectors, ey.eigenvalues)
        };
        Self {
            nx: grid.nx,
            ny: grid.ny,
            qx: ex.eigenvectors,
            lx: ex.eigenvalues,
            qy,
            ly,
        }
    }

    /// Largest eigenvalue magnitude of `L`.
    pub fn spectral_radius(&self) -> f64 {
        self.lx.amax() + self.ly.amax()
    }

    /// Returns `g(L) rhs` where `symbol(lambda)` gives `g` on each eigenvalue.
    pub fn apply_function(&self, rhs: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        assert_eq!(rhs.len(), self.nx * self.ny);
        let b = DMatrix::from_row_slice(self.ny, self.nx, rhs);
        let mut hat = self.qy.transpose() * b * &self.qx;
        for j in 0..self.ny {
            for i in 0..self.nx {
                hat[(j, i)] *= symbol(self.lx[i] + self.ly[j]);
            }
        }
        let out = &self.qy * hat * self.qx.transpose();
        let mut v = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                v.push(out[(j, i)]);
            }
        }
        v
    }

    /// Solves `L x = rhs`, dropping null modes (pseudo-inverse).
    pub fn solve_poisson(&self, rhs: &[f64]) -> Vec<f64> {
        let cut = 1e-10 * self.spectral_radius().max(1.0);
        self.apply_function(rhs, |l| if l.abs() <= cut { 0.0 } else { 1.0 / l })
    }
}
