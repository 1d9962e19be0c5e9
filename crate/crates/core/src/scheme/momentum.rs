use crate::error::Result;
use crate::grid::{face_average, gradient, FaceVectorField, ScalarField};
use crate::linalg::{bicgstab, CsrMatrix, Ilu0, TripletBuilder};
use crate::model::PhysicalParams;

use super::layout::{Affine, VelocityLayout};
use super::{BoundarySpec, SolverConfig, State};

/// Tentative-momentum system `Re/dt u + Re N(u^n) u - lap u = f` with the
/// skew-symmetric central advection operator `N` built from `u^n`.
pub(crate) struct MomentumSystem {
    pub matrix: CsrMatrix,
    ilu: Ilu0,
    /// Everything on the right-hand side except the capillary force.
    base_rhs: Vec<f64>,
    phi_face: FaceVectorField,
    layout: VelocityLayout,
}

struct RowBuilder<'a> {
    b: &'a mut TripletBuilder,
    rhs: &'a mut [f64],
    row: usize,
}

impl RowBuilder<'_> {
    fn couple(&mut self, nb: Affine, coef: f64) {
        if let Some(d) = nb.dof {
            self.b.add(self.row, d, coef * nb.coef);
        }
        self.rhs[self.row] -= coef * nb.constant;
    }
}

impl MomentumSystem {
    pub fn assemble(
        state: &State,
        params: &PhysicalParams,
        cfg: &SolverConfig,
        bc: &BoundarySpec,
        layout: &VelocityLayout,
    ) -> Result<Self> {
        let g = state.grid();
        let (nx, ny) = (g.nx as isize, g.ny as isize);
        let (hx, hy) = (g.hx, g.hy);
        let re = params.re;
        let un = &state.vel;
        let two_d = !g.is_1d();
        let xn = layout.gather(un);
        let uval = |i: isize, j: isize| layout.u_affine(i, j).eval(&xn);
        let vval = |i: isize, j: isize| layout.v_affine(i, j).eval(&xn);
        let grad_p = gradient(&state.p, &bc.p);
        let mut b = TripletBuilder::new(layout.n);
        let mut rhs = vec![0.0; layout.n];
        let diag = re / cfg.dt + 2.0 / (hx * hx) + if two_d { 2.0 / (hy * hy) } else { 0.0 };
        for j in 0..ny {
            for i in 0..=nx {
                let Some(row) = layout.u_dof(i as usize, j as usize) else { continue };
                if layout.bc.periodic_in_x() && i == nx {
                    continue;
                }
                let k = (j * (nx + 1) + i) as usize;
                rhs[row] += re / cfg.dt * un.u[k] - grad_p.u[k];
                b.add(row, row, diag);
                let mut rb = RowBuilder { b: &mut b, rhs: &mut rhs, row };
                let ue = 0.5 * (uval(i, j) + uval(i + 1, j));
                let uw = 0.5 * (uval(i - 1, j) + uval(i, j));
                rb.couple(layout.u_affine(i + 1, j), re * ue / (2.0 * hx) - 1.0 / (hx * hx));
                rb.couple(layout.u_affine(i - 1, j), -re * uw / (2.0 * hx) - 1.0 / (hx * hx));
                if two_d {
                    let vn = 0.5 * (vval(i - 1, j + 1) + vval(i, j + 1));
                    let vs = 0.5 * (vval(i - 1, j) + vval(i, j));
                    rb.couple(layout.u_affine(i, j + 1), re * vn / (2.0 * hy) - 1.0 / (hy * hy));
                    rb.couple(layout.u_affine(i, j - 1), -re * vs / (2.0 * hy) - 1.0 / (hy * hy));
                }
            }
        }
        if two_d {
            for j in 0..=ny {
                for i in 0..nx {
                    let Some(row) = layout.v_dof(i as usize, j as usize) else { continue };
                    if layout.bc.periodic_in_y() && j == ny {
                        continue;
                    }
                    let k = (j * nx + i) as usize;
                    rhs[row] += re / cfg.dt * un.v[k] - grad_p.v[k];
                    b.add(row, row, diag);
                    let mut rb = RowBuilder { b: &mut b, rhs: &mut rhs, row };
                    let ue = 0.5 * (uval(i + 1, j - 1) + uval(i + 1, j));
                    let uw = 0.5 * (uval(i, j - 1) + uval(i, j));
                    let vn = 0.5 * (vval(i, j) + vval(i, j + 1));
                    let vs = 0.5 * (vval(i, j - 1) + vval(i, j));
                    rb.couple(layout.v_affine(i + 1, j), re * ue / (2.0 * hx) - 1.0 / (hx * hx));
                    rb.couple(layout.v_affine(i - 1, j), -re * uw / (2.0 * hx) - 1.0 / (hx * hx));
                    rb.couple(layout.v_affine(i, j + 1), re * vn / (2.0 * hy) - 1.0 / (hy * hy));
                    rb.couple(layout.v_affine(i, j - 1), -re * vs / (2.0 * hy) - 1.0 / (hy * hy));
                }
            }
        }
        let matrix = b.build();
        let ilu = Ilu0::new(&matrix)?;
        Ok(Self {
            matrix,
            ilu,
            base_rhs: rhs,
            phi_face: face_average(&state.phi, &bc.phi),
            layout: layout.clone(),
        })
    }

    /// Right-hand side for chemical potential `mu`.
    pub fn rhs(&self, mu: &ScalarField, params: &PhysicalParams, bc: &BoundarySpec) -> Vec<f64> {
        let grad_mu = gradient(mu, &bc.mu);
        let force = grad_mu.zip_map(&self.phi_face, |gm, ph| -gm * ph / params.ca);
        let f = self.layout.gather(&force);
        self.base_rhs.iter().zip(&f).map(|(a, b)| a + b).collect()
    }

    pub fn solve(
        &self,
        mu: &ScalarField,
        guess: &FaceVectorField,
        params: &PhysicalParams,
        bc: &BoundarySpec,
        cfg: &SolverConfig,
    ) -> Result<FaceVectorField> {
        let b = self.rhs(mu, params, bc);
        let mut x = self.layout.gather(guess);
        bicgstab(&self.matrix, &self.ilu, &b, &mut x, cfg.lin_tol, cfg.lin_max_iters)?;
        Ok(self.layout.scatter(&x))
    }
}
