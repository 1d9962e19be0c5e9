//! Discrete energies, dissipation rates, conservation drift and the
//! vector-calculus identities behind the energy law.

use crate::grid::{gradient, make_grid, Bc, BoundarySpec, FaceVectorField, GridSpec, ScalarField, SideBcs};
use crate::model::{double_well, effective_diffusivity, q_of_c_floored, PhysicalParams, PROFILE_A};
use crate::scheme::State;

/// Floor applied to `c` before evaluating `c ln c` and `ln c`.
pub const ENTROPY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyReport {
    pub e_kin: f64,
    pub e_mix: f64,
    pub e_ent: f64,
    pub e_pressure: f64,
    pub e_total: f64,
    pub e_mod: f64,
    pub d_visc: f64,
    pub d_mu: f64,
    pub d_c: f64,
    /// Some `c` fell below [`ENTROPY_FLOOR`] and was clamped.
    pub entropy_floored: bool,
}

impl EnergyReport {
    /// Components required to be nonnegative (`e_ent` is excluded since
    /// `c ln c < 0` for `0 < c < 1`).
    pub fn nonnegative(&self) -> bool {
        [self.e_kin, self.e_mix, self.e_pressure, self.d_visc, self.d_mu, self.d_c]
            .iter()
            .all(|&v| v >= 0.0)
    }
}

/// `sum w f^2 h_x h_y` over distinct faces, where faces on a non-periodic
/// boundary carry weight 1/2.
fn face_norm2(f: &FaceVectorField, periodic_x: bool, periodic_y: bool) -> f64 {
    let g = f.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut s = 0.0;
    for j in 0..ny {
        for i in 0..=nx {
            if periodic_x && i == nx {
                continue;
            }
            let w = if !periodic_x && (i == 0 || i == nx) { 0.5 } else { 1.0 };
            s += w * f.u_at(i, j).powi(2);
        }
    }
    if !g.is_1d() {
        for j in 0..=ny {
            if periodic_y && j == ny {
                continue;
            }
            let w = if !periodic_y && (j == 0 || j == ny) { 0.5 } else { 1.0 };
            for i in 0..nx {
                s += w * f.v_at(i, j).powi(2);
            }
        }
    }
    s * g.cell_area()
}

fn grad_norm2(f: &ScalarField, bc: &SideBcs) -> f64 {
    face_norm2(&gradient(f, bc), bc.periodic_in_x(), bc.periodic_in_y())
}

/// `||grad u||^2`: normal derivatives at cell centers, tangential ones at
/// cell corners, with wall corners taking the one-sided difference to the
/// wall velocity over half a cell.
fn velocity_gradient_norm2(u: &FaceVectorField, bc: &SideBcs) -> f64 {
    let g = u.grid;
    let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
    let mut s = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            s += ((u.u_at(i + 1, j) - u.u_at(i, j)) / hx).powi(2);
            if !g.is_1d() {
                s += ((u.v_at(i, j + 1) - u.v_at(i, j)) / hy).powi(2);
            }
        }
    }
    if g.is_1d() {
        return s * g.cell_area();
    }
    let (px, py) = (bc.periodic_in_x(), bc.periodic_in_y());
    // du/dy at corners (x-face i, y-face j)
    for j in 0..=ny {
        if py && j == ny {
            continue;
        }
        for i in 0..=nx {
            if px && i == nx {
                continue;
            }
            let wx = if !px && (i == 0 || i == nx) { 0.5 } else { 1.0 };
            let (d, wy) = if j == 0 {
                if py {
                    ((u.u_at(i, 0) - u.u_at(i, ny - 1)) / hy, 1.0)
                } else {
                    ((u.u_at(i, 0) - bc.bottom.wall_speed()) / (0.5 * hy), 0.5)
                }
            } else if j == ny {
                ((bc.top.wall_speed() - u.u_at(i, ny - 1)) / (0.5 * hy), 0.5)
            } else {
                ((u.u_at(i, j) - u.u_at(i, j - 1)) / hy, 1.0)
            };
            s += wx * wy * d * d;
        }
    }
    // dv/dx at corners
    for j in 0..=ny {
        if py && j == ny {
            continue;
        }
        let wy = if !py && (j == 0 || j == ny) { 0.5 } else { 1.0 };
        for i in 0..=nx {
            if px && i == nx {
                continue;
            }
            let (d, wx) = if i == 0 {
                if px {
                    ((u.v_at(0, j) - u.v_at(nx - 1, j)) / hx, 1.0)
                } else {
                    ((u.v_at(0, j) - bc.left.wall_speed()) / (0.5 * hx), 0.5)
                }
            } else if i == nx {
                ((bc.right.wall_speed() - u.v_at(nx - 1, j)) / (0.5 * hx), 0.5)
            } else {
                ((u.v_at(i, j) - u.v_at(i - 1, j)) / hx, 1.0)
            };
            s += wx * wy * d * d;
        }
    }
    s * g.cell_area()
}

/// `sum D_f c_f |grad ln c|^2` over faces, matching the entropy flux of the
/// concentration step.
fn concentration_dissipation(state: &State, p: &PhysicalParams, bc: &BoundarySpec) -> f64 {
    let g = state.grid();
    let phi_face = crate::grid::face_average(&state.phi, &bc.phi);
    let c = |k: usize| state.c.data[k].max(ENTROPY_FLOOR);
    let q = |v: f64| q_of_c_floored(v, p.q_law);
    let d_of = |phi_f: f64, q_f: f64| effective_diffusivity(phi_f, q_f, p, PROFILE_A) / p.pe;
    let (nx, ny) = (g.nx, g.ny);
    let mut s = 0.0;
    let mut visit = |a: Option<usize>, b: Option<usize>, side: Bc, h: f64, phi_f: f64| {
        match (a, b) {
            (Some(l), Some(r)) => {
                let (cl, cr) = (c(l), c(r));
                let dlog = (cr.ln() - cl.ln()) / h;
                s += d_of(phi_f, 0.5 * (q(cl) + q(cr))) * 0.5 * (cl + cr) * dlog * dlog;
            }
            (Some(k), None) | (None, Some(k)) => {
                if let Bc::Dirichlet(gv) = side {
                    let gv = gv.max(ENTROPY_FLOOR);
                    let dlog = (c(k).ln() - gv.ln()) / (0.5 * h);
                    s += 0.5 * d_of(phi_f, q(gv)) * gv * dlog * dlog;
                }
            }
            (None, None) => {}
        }
    };
    let px = bc.c.periodic_in_x();
    for j in 0..ny {
        for i in 0..=nx {
            if px && i == nx {
                continue;
            }
            let left = if i > 0 {
                Some(j * nx + i - 1)
            } else if px {
                Some(j * nx + nx - 1)
            } else {
                None
            };
            let right = (i < nx).then_some(j * nx + i);
            let side = if i == 0 { bc.c.left } else { bc.c.right };
            visit(left, right, side, g.hx, phi_face.u_at(i, j));
        }
    }
    if !g.is_1d() {
        let py = bc.c.periodic_in_y();
        for j in 0..=ny {
            if py && j == ny {
                continue;
            }
            for i in 0..nx {
                let below = if j > 0 {
                    Some((j - 1) * nx + i)
                } else if py {
                    Some((ny - 1) * nx + i)
                } else {
                    None
                };
                let above = (j < ny).then_some(j * nx + i);
                let side = if j == 0 { bc.c.bottom } else { bc.c.top };
                visit(below, above, side, g.hy, phi_face.v_at(i, j));
            }
        }
    }
    s * g.cell_area()
}

/// Returns `(d_visc, d_mu, d_c)`.
pub fn dissipation_rate(state: &State, p: &PhysicalParams, bc: &BoundarySpec) -> (f64, f64, f64) {
    let d_visc = velocity_gradient_norm2(&state.vel, &bc.vel);
    let d_mu = p.mobility / p.ca * grad_norm2(&state.mu, &bc.mu);
    let d_c = concentration_dissipation(state, p, bc);
    (d_visc, d_mu, d_c)
}

/// Energies of `state` and its dissipation rates; `dt` enters only the
/// pressure term of the modified energy.
pub fn total_energy(state: &State, p: &PhysicalParams, dt: f64, bc: &BoundarySpec) -> EnergyReport {
    let g = state.grid();
    let area = g.cell_area();
    let e_kin = 0.5 * p.re * face_norm2(&state.vel, bc.vel.periodic_in_x(), bc.vel.periodic_in_y());
    let bulk: f64 = state.phi.data.iter().map(|&f| double_well(f)).sum::<f64>() * area;
    let e_mix = (0.5 * p.epsilon * grad_norm2(&state.phi, &bc.phi) + bulk / p.epsilon) / p.ca;
    let mut floored = false;
    let e_ent = state
        .c
        .data
        .iter()
        .map(|&c| {
            if c < ENTROPY_FLOOR {
                floored = true;
            }
            let c = c.max(ENTROPY_FLOOR);
            c * c.ln()
        })
        .sum::<f64>()
        * area;
    let e_pressure = dt * dt / (2.0 * p.re) * grad_norm2(&state.p, &bc.p);
    let (d_visc, d_mu, d_c) = dissipation_rate(state, p, bc);
    let e_total = e_kin + e_mix + e_ent;
    EnergyReport {
        e_kin,
        e_mix,
        e_ent,
        e_pressure,
        e_total,
        e_mod: e_total + e_pressure,
        d_visc,
        d_mu,
        d_c,
        entropy_floored: floored,
    }
}

/// Relative drift of the volume of `phi` and the mass of `c`.
#[derive(Debug, Clone)]
pub struct ConservationTracker {
    volume0: f64,
    mass0: f64,
    volume_scale: f64,
    mass_scale: f64,
    pub max_volume_drift: f64,
    pub max_mass_drift: f64,
}

impl ConservationTracker {
    pub fn new(initial: &State) -> Self {
        let area = initial.grid().cell_area();
        let abs_int = |f: &ScalarField| f.data.iter().map(|v| v.abs()).sum::<f64>() * area;
        let volume0 = initial.phi.integral();
        let mass0 = initial.c.integral();
        Self {
            volume0,
            mass0,
            volume_scale: volume0.abs().max(abs_int(&initial.phi)).max(f64::MIN_POSITIVE),
            mass_scale: mass0.abs().max(abs_int(&initial.c)).max(f64::MIN_POSITIVE),
            max_volume_drift: 0.0,
            max_mass_drift: 0.0,
        }
    }

    pub fn observe(&mut self, s: &State) {
        let dv = (s.phi.integral() - self.volume0).abs() / self.volume_scale;
        let dm = (s.c.integral() - self.mass0).abs() / self.mass_scale;
        self.max_volume_drift = self.max_volume_drift.max(dv);
        self.max_mass_drift = self.max_mass_drift.max(dm);
    }
}

/// Maximum drift of volume and mass relative to the first snapshot. The
/// reference magnitude is `max(|initial integral|, integral of |initial field|)`.
pub fn conservation_report<'a>(history: impl IntoIterator<Item = &'a State>) -> (f64, f64) {
    let mut it = history.into_iter();
    let Some(first) = it.next() else { return (0.0, 0.0) };
    let mut t = ConservationTracker::new(first);
    for s in it {
        t.observe(s);
    }
    (t.max_volume_drift, t.max_mass_drift)
}

/// Residuals of the two tensor identities on a refinement sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub h: Vec<f64>,
    /// `div(grad phi (x) grad phi) - lap phi grad phi - grad |grad phi|^2 / 2`.
    pub stress_residual: Vec<f64>,
    /// `|D(u)|^2 - D(u) : grad u`.
    pub deformation_residual: Vec<f64>,
    pub stress_orders: Vec<f64>,
    pub deformation_orders: Vec<f64>,
}

fn orders(h: &[f64], e: &[f64]) -> Vec<f64> {
    (1..e.len())
        .map(|k| (e[k - 1] / e[k]).ln() / (h[k - 1] / h[k]).ln())
        .collect()
}

/// L-infinity residual of the capillary-stress identity for `phi` on a
/// periodic grid.
pub fn stress_identity_residual(phi: &ScalarField) -> f64 {
    let g = phi.grid;
    let bc = SideBcs::periodic();
    let gr = gradient(phi, &bc);
    let lap = crate::grid::divergence(&gr);
    let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
    if g.is_1d() {
        let mut r: f64 = 0.0;
        for i in 0..nx {
            let (a, b) = (gr.u_at(i, 0), gr.u_at(i + 1, 0));
            let lhs = (b * b - a * a) / hx;
            let rhs = lap.get(i, 0) * 0.5 * (a + b) + 0.5 * (b * b - a * a) / hx;
            r = r.max((lhs - rhs).abs());
        }
        return r;
    }
    let wrap = |k: isize, n: usize| k.rem_euclid(n as isize) as usize;
    let gx = |i: usize, j: usize| 0.5 * (gr.u_at(i, j) + gr.u_at(i + 1, j));
    let gy = |i: usize, j: usize| 0.5 * (gr.v_at(i, j) + gr.v_at(i, j + 1));
    let gx2 = |i: usize, j: usize| 0.5 * (gr.u_at(i, j).powi(2) + gr.u_at(i + 1, j).powi(2));
    let gy2 = |i: usize, j: usize| 0.5 * (gr.v_at(i, j).powi(2) + gr.v_at(i, j + 1).powi(2));
    let mut r: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let (ip, im) = (wrap(i as isize + 1, nx), wrap(i as isize - 1, nx));
            let (jp, jm) = (wrap(j as isize + 1, ny), wrap(j as isize - 1, ny));
            let dx_ux2 = (gr.u_at(i + 1, j).powi(2) - gr.u_at(i, j).powi(2)) / hx;
            let dy_vy2 = (gr.v_at(i, j + 1).powi(2) - gr.v_at(i, j).powi(2)) / hy;
            let lhs_x = dx_ux2 + (gx(i, jp) * gy(i, jp) - gx(i, jm) * gy(i, jm)) / (2.0 * hy);
            let lhs_y = dy_vy2 + (gx(ip, j) * gy(ip, j) - gx(im, j) * gy(im, j)) / (2.0 * hx);
            let rhs_x = lap.get(i, j) * gx(i, j) + 0.5 * dx_ux2 + 0.5 * (gy2(ip, j) - gy2(im, j)) / (2.0 * hx);
            let rhs_y = lap.get(i, j) * gy(i, j) + 0.5 * dy_vy2 + 0.5 * (gx2(i, jp) - gx2(i, jm)) / (2.0 * hy);
            r = r.max((lhs_x - rhs_x).abs()).max((lhs_y - rhs_y).abs());
        }
    }
    r
}

/// L-infinity residual of `|D|^2 = D : grad u` with the shear part computed
/// at cell corners and averaged to centers on both sides.
pub fn deformation_identity_residual(u: &FaceVectorField) -> f64 {
    let g = u.grid;
    let (nx, ny, hx, hy) = (g.nx, g.ny, g.hx, g.hy);
    let wrap = |k: isize, n: usize| k.rem_euclid(n as isize) as usize;
    // corner (i, j) sits at x = x_i, y = y_j
    let shear = |i: usize, j: usize| {
        let uy = (u.u_at(i, j) - u.u_at(i, wrap(j as isize - 1, ny))) / hy;
        let vx = (u.v_at(i, j) - u.v_at(wrap(i as isize - 1, nx), j)) / hx;
        (uy, vx)
    };
    let mut r: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let ux = (u.u_at(i + 1, j) - u.u_at(i, j)) / hx;
            let vy = (u.v_at(i, j + 1) - u.v_at(i, j)) / hy;
            let mut d12_avg = 0.0;
            let mut contraction_avg = 0.0;
            for (ci, cj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                let (uy, vx) = shear(wrap(ci as isize, nx), wrap(cj as isize, ny));
                let d12 = 0.5 * (uy + vx);
                d12_avg += 0.25 * d12;
                contraction_avg += 0.25 * (d12 * uy + d12 * vx);
            }
            let lhs = ux * ux + vy * vy + 2.0 * d12_avg * d12_avg;
            let rhs = ux * ux + vy * vy + contraction_avg;
            r = r.max((lhs - rhs).abs());
        }
    }
    r
}

/// Evaluates both identities on periodic unit squares with the given
/// spacings (each `1/h` must be an integer) for smooth trigonometric fields.
pub fn verify_identities(h_sequence: &[f64]) -> crate::error::Result<IdentityReport> {
    use std::f64::consts::PI;
    let mut rep = IdentityReport {
        h: h_sequence.to_vec(),
        stress_residual: Vec::new(),
        deformation_residual: Vec::new(),
        stress_orders: Vec::new(),
        deformation_orders: Vec::new(),
    };
    for &h in h_sequence {
        let n = (1.0 / h).round() as usize;
        if n == 0 || ((n as f64) * h - 1.0).abs() > 1e-9 {
            return Err(crate::error::Error::Config(format!("1/h must be a positive integer, got h = {h}")));
        }
        let g = make_grid(GridSpec::unit_square(n))?;
        let phi = ScalarField::from_fn(g, |x, y| (2.0 * PI * x).cos() * (2.0 * PI * y).cos());
        let u = FaceVectorField::from_fns(
            g,
            |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).cos() + 0.5 * (2.0 * PI * y).sin(),
            |x, y| -(2.0 * PI * x).cos() * (2.0 * PI * y).sin() + 0.3 * (4.0 * PI * x).cos(),
        );
        rep.stress_residual.push(stress_identity_residual(&phi));
        rep.deformation_residual.push(deformation_identity_residual(&u));
    }
    rep.stress_orders = orders(&rep.h, &rep.stress_residual);
    rep.deformation_orders = orders(&rep.h, &rep.deformation_residual);
    Ok(rep)
}
