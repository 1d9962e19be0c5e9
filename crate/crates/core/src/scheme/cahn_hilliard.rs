use crate::error::{Error, Result};
use crate::grid::{
    advect_conservative, divergence, gradient_homogeneous, laplacian, FaceVectorField, ScalarField, SideBcs,
};
use crate::linalg::{cell_laplacian, gmres, Ilu0, LinearOperator, Preconditioner, SeparableSolver, TripletBuilder};
use crate::model::{double_well_prime, PhysicalParams};

use super::{BoundarySpec, SolverConfig, State};

fn lap_h(x: &[f64], like: &ScalarField, bc: &SideBcs) -> Vec<f64> {
    let f = ScalarField::from_vec(like.grid, x.to_vec());
    divergence(&gradient_homogeneous(&f, bc)).data
}

/// Linear part of the stabilized Cahn-Hilliard block acting on `[phi; mu]`:
/// `phi/dt - M lap mu` and `mu + eps lap phi - (s/eps) phi`.
pub(crate) struct ChOperator<'a> {
    pub template: &'a ScalarField,
    pub dt: f64,
    pub params: &'a PhysicalParams,
    pub bc_phi: SideBcs,
    pub bc_mu: SideBcs,
}

impl LinearOperator for ChOperator<'_> {
    fn dim(&self) -> usize {
        2 * self.template.data.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.template.data.len();
        let (phi, mu) = x.split_at(n);
        let lap_mu = lap_h(mu, self.template, &self.bc_mu);
        let lap_phi = lap_h(phi, self.template, &self.bc_phi);
        let p = self.params;
        let (eps, m, s) = (p.epsilon, p.mobility, p.s);
        for k in 0..n {
            y[k] = phi[k] / self.dt - m * lap_mu[k];
            y[n + k] = mu[k] + eps * lap_phi[k] - (s / eps) * phi[k];
        }
    }
}

/// Exact inverse of [`ChOperator`] through the Schur complement in `phi`,
/// valid when `phi` and `mu` share boundary kinds.
struct SchurInverse<'a> {
    op: &'a ChOperator<'a>,
    solver: &'a SeparableSolver,
}

impl Preconditioner for SchurInverse<'_> {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let op = self.op;
        let n = op.template.data.len();
        let (r1, r2) = r.split_at(n);
        let p = op.params;
        let (eps, m, s, dt) = (p.epsilon, p.mobility, p.s, op.dt);
        let lap_r2 = lap_h(r2, op.template, &op.bc_mu);
        let rhs: Vec<f64> = r1.iter().zip(&lap_r2).map(|(a, b)| a + m * b).collect();
        let phi = self
            .solver
            .apply_function(&rhs, |l| 1.0 / (1.0 / dt + m * eps * l * l - (m * s / eps) * l));
        let lap_phi = lap_h(&phi, op.template, &op.bc_phi);
        for k in 0..n {
            z[k] = phi[k];
            z[n + k] = r2[k] - eps * lap_phi[k] + (s / eps) * phi[k];
        }
    }
}

fn block_matrix(op: &ChOperator) -> crate::linalg::CsrMatrix {
    let g = op.template.grid;
    let n = g.cell_count();
    let lmu = cell_laplacian(&g, &op.bc_mu);
    let lphi = cell_laplacian(&g, &op.bc_phi);
    let p = op.params;
    let mut b = TripletBuilder::new(2 * n);
    for row in 0..n {
        b.add(row, row, 1.0 / op.dt);
        for k in lmu.row_ptr[row]..lmu.row_ptr[row + 1] {
            b.add(row, n + lmu.cols[k], -p.mobility * lmu.vals[k]);
        }
        b.add(n + row, n + row, 1.0);
        b.add(n + row, row, -p.s / p.epsilon);
        for k in lphi.row_ptr[row]..lphi.row_ptr[row + 1] {
            b.add(n + row, lphi.cols[k], p.epsilon * lphi.vals[k]);
        }
    }
    b.build()
}

/// Right-hand side of the Cahn-Hilliard block for transport velocity `u`.
pub(crate) fn rhs(state: &State, u: &FaceVectorField, params: &PhysicalParams, dt: f64, bc: &BoundarySpec) -> Vec<f64> {
    let g = state.phi.grid;
    let zero = ScalarField::zeros(g);
    let offset_mu = laplacian(&zero, &bc.mu);
    let offset_phi = laplacian(&zero, &bc.phi);
    let adv = advect_conservative(u, &state.phi, &bc.phi);
    let (eps, s, m) = (params.epsilon, params.s, params.mobility);
    let n = g.cell_count();
    let mut r = vec![0.0; 2 * n];
    for k in 0..n {
        let phi = state.phi.data[k];
        r[k] = phi / dt - adv.data[k] + m * offset_mu.data[k];
        r[n + k] = -(s / eps) * phi + double_well_prime(phi) / eps - eps * offset_phi.data[k];
    }
    r
}

/// Solves the Cahn-Hilliard block for given transport velocity `u`.
pub(crate) fn solve(
    state: &State,
    u: &FaceVectorField,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    bc: &BoundarySpec,
    cache: &mut Option<SeparableSolver>,
) -> Result<(ScalarField, ScalarField)> {
    let direct = bc.phi.same_kinds(&bc.mu);
    solve_with(state, u, params, cfg, bc, cache, direct)
}

pub(crate) fn solve_with(
    state: &State,
    u: &FaceVectorField,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    bc: &BoundarySpec,
    cache: &mut Option<SeparableSolver>,
    direct: bool,
) -> Result<(ScalarField, ScalarField)> {
    let g = state.phi.grid;
    let n = g.cell_count();
    let b = rhs(state, u, params, cfg.dt, bc);
    let op = ChOperator {
        template: &state.phi,
        dt: cfg.dt,
        params,
        bc_phi: bc.phi,
        bc_mu: bc.mu,
    };
    let mut x = vec![0.0; 2 * n];
    if direct {
        let solver = cache.get_or_insert_with(|| SeparableSolver::new(&g, &bc.phi));
        let pc = SchurInverse { op: &op, solver };
        pc.apply(&b, &mut x);
        gmres(&op, &pc, &b, &mut x, cfg.lin_tol, 20, cfg.lin_max_iters)?;
    } else {
        x[..n].copy_from_slice(&state.phi.data);
        x[n..].copy_from_slice(&state.mu.data);
        let a = block_matrix(&op);
        let ilu = Ilu0::new(&a)?;
        gmres(&op, &ilu, &b, &mut x, cfg.lin_tol, 50, cfg.lin_max_iters)?;
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Consistency("Cahn-Hilliard solve produced non-finite values".into()));
    }
    let mu = x.split_off(n);
    Ok((ScalarField::from_vec(g, x), ScalarField::from_vec(g, mu)))
}
