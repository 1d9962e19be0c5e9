use crate::error::{Error, Result};
use crate::grid::{face_average, Bc, FaceVectorField, ScalarField};
use crate::linalg::{bicgstab, CsrMatrix, Ilu0, TripletBuilder};
use crate::model::{effective_diffusivity, q_of_c_floored, PhysicalParams, PROFILE_A};

use super::{BoundarySpec, SolverConfig, State, Step3Mode};

/// One face of the concentration control volumes, oriented from `left`
/// to `right` (the positive coordinate direction).
#[derive(Debug, Clone, Copy)]
struct Face {
    left: Option<usize>,
    right: Option<usize>,
    h: f64,
    area: f64,
    vel: f64,
    /// `D_eff / Pe` on the face.
    d: f64,
    /// Dirichlet wall value; `None` with a missing neighbor means no flux.
    wall: Option<f64>,
}

fn wall_value(bc: Bc) -> Option<f64> {
    match bc {
        Bc::Dirichlet(g) => Some(g),
        _ => None,
    }
}

fn build_faces(
    c_old: &ScalarField,
    phi: &ScalarField,
    u: &FaceVectorField,
    params: &PhysicalParams,
    bc: &BoundarySpec,
) -> Vec<Face> {
    let g = c_old.grid;
    let (nx, ny) = (g.nx, g.ny);
    let phi_face = face_average(phi, &bc.phi);
    let q = |c: f64| q_of_c_floored(c, params.q_law);
    let mut faces = Vec::new();
    let mut push = |left: Option<usize>, right: Option<usize>, side: Bc, h: f64, area: f64, vel: f64, phi_f: f64| {
        let wall = if left.is_none() || right.is_none() { wall_value(side) } else { None };
        let q_f = match (left, right) {
            (Some(l), Some(r)) => 0.5 * (q(c_old.data[l]) + q(c_old.data[r])),
            (Some(k), None) | (None, Some(k)) => q(wall.unwrap_or(c_old.data[k])),
            (None, None) => 1.0,
        };
        let d = effective_diffusivity(phi_f, q_f, params, PROFILE_A) / params.pe;
        faces.push(Face { left, right, h, area, vel, d, wall });
    };
    let px = bc.c.periodic_in_x();
    for j in 0..ny {
        let last = if px { nx - 1 } else { nx };
        for i in 0..=last {
            let k = j * (nx + 1) + i;
            let left = if i > 0 {
                Some(j * nx + i - 1)
            } else if px {
                Some(j * nx + nx - 1)
            } else {
                None
            };
            let right = if i < nx { Some(j * nx + i) } else { None };
            let side = if i == 0 { bc.c.left } else { bc.c.right };
            push(left, right, side, g.hx, g.hy, u.u[k], phi_face.u[k]);
        }
    }
    if !g.is_1d() {
        let py = bc.c.periodic_in_y();
        let last = if py { ny - 1 } else { ny };
        for j in 0..=last {
            for i in 0..nx {
                let k = j * nx + i;
                let left = if j > 0 {
                    Some((j - 1) * nx + i)
                } else if py {
                    Some((ny - 1) * nx + i)
                } else {
                    None
                };
                let right = if j < ny { Some(j * nx + i) } else { None };
                let side = if j == 0 { bc.c.bottom } else { bc.c.top };
                push(left, right, side, g.hy, g.hx, u.v[k], phi_face.v[k]);
            }
        }
    }
    faces
}

/// Logarithmic mean and its partial derivatives.
pub(crate) fn log_mean(a: f64, b: f64) -> (f64, f64, f64) {
    let xi = (a - b) / (a + b);
    if xi.abs() < 1e-2 {
        let m = 0.5 * (a + b);
        let x2 = xi * xi;
        let f = 1.0 - x2 / 3.0 - 4.0 * x2 * x2 / 45.0 - 44.0 * x2 * x2 * x2 / 945.0;
        let fp = -2.0 * xi / 3.0 - 16.0 * xi * x2 / 45.0 - 264.0 * xi * x2 * x2 / 945.0;
        let s2 = (a + b) * (a + b);
        (m * f, 0.5 * f + m * fp * 2.0 * b / s2, 0.5 * f - m * fp * 2.0 * a / s2)
    } else {
        let t = a.ln() - b.ln();
        let l = (a - b) / t;
        (l, (t - (a - b) / a) / (t * t), (-t + (a - b) / b) / (t * t))
    }
}

/// Flux through a face and its derivatives with respect to the left and
/// right cell values.
fn face_flux(f: &Face, cl: f64, cr: f64, mode: Step3Mode) -> (f64, f64, f64) {
    match (f.left, f.right) {
        (Some(_), Some(_)) => match mode {
            Step3Mode::LinearizedFlux => {
                let flux = f.vel * 0.5 * (cl + cr) - f.d * (cr - cl) / f.h;
                (flux, 0.5 * f.vel + f.d / f.h, 0.5 * f.vel - f.d / f.h)
            }
            Step3Mode::EntropyFlux => {
                let (lm, dla, dlb) = log_mean(cl, cr);
                let cbar = 0.5 * (cl + cr);
                let dlog = cr.ln() - cl.ln();
                let k = f.d / f.h;
                let flux = f.vel * lm - k * cbar * dlog;
                let dl = f.vel * dla - k * (0.5 * dlog - cbar / cl);
                let dr = f.vel * dlb - k * (0.5 * dlog + cbar / cr);
                (flux, dl, dr)
            }
        },
        (None, Some(_)) => {
            let Some(g) = f.wall else { return (0.0, 0.0, 0.0) };
            let hh = 0.5 * f.h;
            match mode {
                Step3Mode::LinearizedFlux => (f.vel * g - f.d * (cr - g) / hh, 0.0, -f.d / hh),
                Step3Mode::EntropyFlux => (
                    f.vel * g - f.d * g * (cr.ln() - g.ln()) / hh,
                    0.0,
                    -f.d * g / (cr * hh),
                ),
            }
        }
        (Some(_), None) => {
            let Some(g) = f.wall else { return (0.0, 0.0, 0.0) };
            let hh = 0.5 * f.h;
            match mode {
                Step3Mode::LinearizedFlux => (f.vel * g - f.d * (g - cl) / hh, f.d / hh, 0.0),
                Step3Mode::EntropyFlux => (
                    f.vel * g - f.d * g * (g.ln() - cl.ln()) / hh,
                    f.d * g / (cl * hh),
                    0.0,
                ),
            }
        }
        (None, None) => (0.0, 0.0, 0.0),
    }
}

/// Residual `(c - c_old)/dt + div F(c)` per cell, optionally with its Jacobian.
fn residual(
    faces: &[Face],
    c: &[f64],
    c_old: &[f64],
    dt: f64,
    cell_area: f64,
    mode: Step3Mode,
    jac: Option<&mut TripletBuilder>,
) -> Vec<f64> {
    let mut r: Vec<f64> = c.iter().zip(c_old).map(|(a, b)| (a - b) / dt).collect();
    let mut jac = jac;
    if let Some(b) = jac.as_deref_mut() {
        for k in 0..c.len() {
            b.add(k, k, 1.0 / dt);
        }
    }
    for f in faces {
        let cl = f.left.map_or(0.0, |k| c[k]);
        let cr = f.right.map_or(0.0, |k| c[k]);
        let (flux, dl, dr) = face_flux(f, cl, cr, mode);
        let w = f.area / cell_area;
        if let Some(l) = f.left {
            r[l] += w * flux;
        }
        if let Some(rr) = f.right {
            r[rr] -= w * flux;
        }
        if let Some(b) = jac.as_deref_mut() {
            for (row, sign) in [(f.left, 1.0), (f.right, -1.0)] {
                let Some(row) = row else { continue };
                if let Some(l) = f.left {
                    b.add(row, l, sign * w * dl);
                }
                if let Some(rc) = f.right {
                    b.add(row, rc, sign * w * dr);
                }
            }
        }
    }
    r
}

/// Implicit Euler update of the concentration. Returns the new field and
/// the number of Newton iterations.
pub(crate) fn solve(
    state: &State,
    phi_next: &ScalarField,
    u_next: &FaceVectorField,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    bc: &BoundarySpec,
) -> Result<(ScalarField, usize)> {
    let g = state.grid();
    let mode = cfg.step3_mode;
    if mode == Step3Mode::EntropyFlux {
        if state.c.min() <= 0.0 {
            return Err(Error::Domain("entropy flux mode needs c > 0".into()));
        }
        for side in bc.c.sides() {
            if let Bc::Dirichlet(v) = side {
                if v <= 0.0 {
                    return Err(Error::Domain("entropy flux mode needs positive Dirichlet data".into()));
                }
            }
        }
    }
    let faces = build_faces(&state.c, phi_next, u_next, params, bc);
    let n = g.cell_count();
    let area = g.cell_area();
    let c_old = &state.c.data;
    let mut c = c_old.clone();
    let mut last = f64::INFINITY;
    let mut target = 0.0;
    for it in 0..cfg.newton_max_iters {
        let mut jb = TripletBuilder::new(n);
        let r = residual(&faces, &c, c_old, cfg.dt, area, mode, Some(&mut jb));
        let jac = jb.build();
        target = cfg.newton_tol * operator_scale(&jac, &c);
        last = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if last <= target {
            return finish(g, c, it, mode);
        }
        let ilu = Ilu0::new(&jac)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tol = cfg.lin_tol.max((0.1 * target / rhs_norm).min(0.5));
        let mut delta = vec![0.0; n];
        bicgstab(&jac, &ilu, &rhs, &mut delta, tol, cfg.lin_max_iters)?;
        let mut alpha = 1.0;
        if mode == Step3Mode::EntropyFlux {
            let mut halvings = 0;
            while c.iter().zip(&delta).any(|(a, d)| a + alpha * d <= 0.0) {
                alpha *= 0.5;
                halvings += 1;
                if halvings > 60 {
                    return Err(Error::NonConvergence { what: "Newton line search", iterations: it + 1, residual: last });
                }
            }
        }
        c.iter_mut().zip(&delta).for_each(|(a, d)| *a += alpha * d);
    }
    let r = residual(&faces, &c, c_old, cfg.dt, area, mode, None);
    let fin = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if fin <= target {
        return finish(g, c, cfg.newton_max_iters, mode);
    }
    Err(Error::NonConvergence {
        what: "concentration Newton iteration",
        iterations: cfg.newton_max_iters,
        residual: fin.min(last) / target.max(f64::MIN_POSITIVE) * cfg.newton_tol,
    })
}

/// `max_i sum_j |J_ij c_j|`, the size of the terms that make up the residual.
fn operator_scale(jac: &CsrMatrix, c: &[f64]) -> f64 {
    (0..jac.n)
        .map(|i| {
            (jac.row_ptr[i]..jac.row_ptr[i + 1])
                .map(|k| (jac.vals[k] * c[jac.cols[k]]).abs())
                .sum::<f64>()
        })
        .fold(f64::MIN_POSITIVE, f64::max)
}

fn finish(g: crate::grid::Grid, c: Vec<f64>, iters: usize, mode: Step3Mode) -> Result<(ScalarField, usize)> {
    let f = ScalarField::from_vec(g, c);
    if mode == Step3Mode::LinearizedFlux && f.min() < 0.0 {
        log::warn!("linearized concentration update produced negative values (min {:.3e})", f.min());
    }
    Ok((f, iters))
}
