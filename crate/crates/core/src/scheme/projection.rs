use crate::error::{Error, Result};
use crate::grid::{divergence, gradient, laplacian, FaceVectorField, ScalarField};
use crate::linalg::SeparableSolver;

use super::layout::VelocityLayout;
use super::{BoundarySpec, SolverConfig};

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `(dt/Re) lap psi = div u_tilde`, then corrects velocity and pressure.
pub(crate) fn project(
    u_tilde: &FaceVectorField,
    p_old: &ScalarField,
    re: f64,
    cfg: &SolverConfig,
    bc: &BoundarySpec,
    poisson: &SeparableSolver,
    layout: &VelocityLayout,
) -> Result<(FaceVectorField, ScalarField)> {
    let g = u_tilde.grid;
    let div = divergence(u_tilde);
    let net: f64 = div.data.iter().sum();
    let scale: f64 = div.data.iter().map(|d| d.abs()).sum();
    if net.abs() > 1e-10 * scale + 1e-12 * div.data.len() as f64 {
        return Err(Error::Consistency(format!(
            "pressure Poisson problem is incompatible: net boundary flux {:.3e}",
            net * g.cell_area()
        )));
    }
    let mut rhs = div.map(|d| d * re / cfg.dt);
    rhs.subtract_mean();
    let rn = norm2(&rhs.data);
    let mut psi = ScalarField::from_vec(g, poisson.solve_poisson(&rhs.data));
    let mut res = 0.0;
    for _ in 0..4 {
        let lap = laplacian(&psi, &bc.p);
        let mut r = rhs.zip_map(&lap, |a, b| a - b);
        res = if rn > 0.0 { norm2(&r.data) / rn } else { 0.0 };
        if res <= cfg.lin_tol {
            break;
        }
        r.subtract_mean();
        let corr = poisson.solve_poisson(&r.data);
        psi.data.iter_mut().zip(&corr).for_each(|(a, b)| *a += b);
    }
    if res > cfg.lin_tol {
        return Err(Error::NonConvergence { what: "pressure projection", iterations: 4, residual: res });
    }
    psi.subtract_mean();
    let grad = gradient(&psi, &bc.p);
    let k = cfg.dt / re;
    let mut u = u_tilde.zip_map(&grad, |a, b| a - k * b);
    layout.impose_walls(&mut u);
    let mut p = p_old.zip_map(&psi, |a, b| a + b);
    p.subtract_mean();
    Ok((u, p))
}
