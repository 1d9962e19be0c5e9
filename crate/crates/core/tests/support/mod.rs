//! Independent monolithic reference for one time step on a fully periodic
//! square grid. Residuals are written directly from the stencils; the
//! coupled phase/momentum block, the pressure increment and the nonlinear
//! concentration update are solved with dense LU and fixed-point iteration.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use permeaflow::model::{double_well_prime, effective_diffusivity, PhysicalParams, PROFILE_A};
use permeaflow::scheme::State;

pub struct OracleStep {
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub c: Vec<f64>,
    /// Fixed-point sweeps used by the coupled block and by the concentration.
    pub sweeps: (usize, usize),
}

struct Periodic {
    n: usize,
    h: f64,
}

impl Periodic {
    fn at(&self, i: isize, j: isize) -> usize {
        let n = self.n as isize;
        (j.rem_euclid(n) * n + i.rem_euclid(n)) as usize
    }

    fn lap(&self, f: &[f64], i: isize, j: isize) -> f64 {
        (f[self.at(i + 1, j)] + f[self.at(i - 1, j)] + f[self.at(i, j + 1)] + f[self.at(i, j - 1)]
            - 4.0 * f[self.at(i, j)])
            / (self.h * self.h)
    }
}

/// Unique periodic faces: `u` face `(i, j)` sits left of cell `(i, j)`,
/// `v` face `(i, j)` below it.
fn unique_faces(s: &State) -> (Vec<f64>, Vec<f64>) {
    let n = s.grid().nx;
    let mut u = vec![0.0; n * n];
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            u[j * n + i] = s.vel.u_at(i, j);
            v[j * n + i] = s.vel.v_at(i, j);
        }
    }
    (u, v)
}

fn lu_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    a.clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("oracle matrix is nonsingular")
        .as_slice()
        .to_vec()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Jacobian of `f` by columns; exact for affine maps up to roundoff.
fn jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], step: f64) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut a = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for col in 0..n {
        let dx = step * x[col].abs().max(1.0);
        xp[col] = x[col] + dx;
        let f1 = f(&xp);
        for row in 0..n {
            a[(row, col)] = (f1[row] - f0[row]) / dx;
        }
        xp[col] = x[col];
    }
    a
}

/// Fixed-point iteration `x <- x - A^{-1} F(x)` with `A` frozen at `x0`.
fn fixed_point(f: &dyn Fn(&[f64]) -> Vec<f64>, x0: Vec<f64>, step: f64, tol: f64) -> (Vec<f64>, usize) {
    let a = jacobian(f, &x0, step);
    let lu = a.lu();
    let mut x = x0;
    for sweep in 1..=50 {
        let r = f(&x);
        let dx = lu.solve(&DVector::from_column_slice(&r)).expect("nonsingular");
        for (xi, d) in x.iter_mut().zip(dx.iter()) {
            *xi -= d;
        }
        if max_abs(dx.as_slice()) <= tol * max_abs(&x).max(1.0) {
            return (x, sweep);
        }
    }
    panic!("oracle fixed-point iteration did not converge");
}

fn log_mean(a: f64, b: f64) -> f64 {
    if a == b {
        a
    } else {
        (a - b) / (a.ln() - b.ln())
    }
}

/// Reference step from `s` (periodic `n x n` grid, entropy flux form).
pub fn oracle_step(s: &State, p: &PhysicalParams, dt: f64) -> OracleStep {
    let g = s.grid();
    let n = g.nx;
    assert_eq!(n, g.ny);
    let nn = n * n;
    let grid = Periodic { n, h: g.hx };
    let h = grid.h;
    let at = |i: isize, j: isize| grid.at(i, j);
    let (un, vn) = unique_faces(s);
    let phin = &s.phi.data;
    let pn = &s.p.data;
    let (eps, m, ss, re, ca) = (p.epsilon, p.mobility, p.s, p.re, p.ca);

    let mu_of = |phi: &[f64]| -> Vec<f64> {
        let mut mu = vec![0.0; nn];
        for j in 0..n as isize {
            for i in 0..n as isize {
                let k = at(i, j);
                mu[k] = -eps * grid.lap(phi, i, j) + ss / eps * (phi[k] - phin[k]) + double_well_prime(phin[k]) / eps;
            }
        }
        mu
    };

    let coupled = |x: &[f64]| -> Vec<f64> {
        let (phi, rest) = x.split_at(nn);
        let (u, v) = rest.split_at(nn);
        let mu = mu_of(phi);
        let mut r = vec![0.0; 3 * nn];
        for j in 0..n as isize {
            for i in 0..n as isize {
                let k = at(i, j);
                let flux_e = u[at(i + 1, j)] * 0.5 * (phin[k] + phin[at(i + 1, j)]);
                let flux_w = u[k] * 0.5 * (phin[at(i - 1, j)] + phin[k]);
                let flux_n = v[at(i, j + 1)] * 0.5 * (phin[k] + phin[at(i, j + 1)]);
                let flux_s = v[k] * 0.5 * (phin[at(i, j - 1)] + phin[k]);
                r[k] = (phi[k] - phin[k]) / dt + (flux_e - flux_w + flux_n - flux_s) / h - m * grid.lap(&mu, i, j);

                let ue = 0.5 * (un[k] + un[at(i + 1, j)]);
                let uw = 0.5 * (un[at(i - 1, j)] + un[k]);
                let vnn = 0.5 * (vn[at(i - 1, j + 1)] + vn[at(i, j + 1)]);
                let vs = 0.5 * (vn[at(i - 1, j)] + vn[k]);
                let adv = (ue * u[at(i + 1, j)] - uw * u[at(i - 1, j)] + vnn * u[at(i, j + 1)] - vs * u[at(i, j - 1)])
                    / (2.0 * h);
                let phi_f = 0.5 * (phin[at(i - 1, j)] + phin[k]);
                let force = phi_f * (mu[k] - mu[at(i - 1, j)]) / h / ca;
                let gp = (pn[k] - pn[at(i - 1, j)]) / h;
                r[nn + k] = re / dt * (u[k] - un[k]) + re * adv - grid.lap(u, i, j) + gp + force;

                let ue = 0.5 * (un[at(i + 1, j - 1)] + un[at(i + 1, j)]);
                let uw = 0.5 * (un[at(i, j - 1)] + un[k]);
                let vnn = 0.5 * (vn[k] + vn[at(i, j + 1)]);
                let vs = 0.5 * (vn[at(i, j - 1)] + vn[k]);
                let adv = (ue * v[at(i + 1, j)] - uw * v[at(i - 1, j)] + vnn * v[at(i, j + 1)] - vs * v[at(i, j - 1)])
                    / (2.0 * h);
                let phi_f = 0.5 * (phin[at(i, j - 1)] + phin[k]);
                let force = phi_f * (mu[k] - mu[at(i, j - 1)]) / h / ca;
                let gp = (pn[k] - pn[at(i, j - 1)]) / h;
                r[2 * nn + k] = re / dt * (v[k] - vn[k]) + re * adv - grid.lap(v, i, j) + gp + force;
            }
        }
        r
    };
    let x0: Vec<f64> = phin.iter().chain(&un).chain(&vn).copied().collect();
    let (x, sweeps_a) = fixed_point(&coupled, x0, 1e-6, 1e-14);
    let phi = x[..nn].to_vec();
    let ut = x[nn..2 * nn].to_vec();
    let vt = x[2 * nn..].to_vec();
    let mu = mu_of(&phi);

    // Pressure increment: lap psi = (Re/dt) div u_tilde, mean zero, via a
    // bordered system.
    let mut a = DMatrix::zeros(nn + 1, nn + 1);
    let mut b = vec![0.0; nn + 1];
    for j in 0..n as isize {
        for i in 0..n as isize {
            let k = at(i, j);
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                a[(k, at(i + di, j + dj))] += 1.0 / (h * h);
            }
            a[(k, k)] -= 4.0 / (h * h);
            a[(k, nn)] = 1.0;
            a[(nn, k)] = 1.0;
            let div = (ut[at(i + 1, j)] - ut[k] + vt[at(i, j + 1)] - vt[k]) / h;
            b[k] = re / dt * div;
        }
    }
    let psi = lu_solve(&a, &b);
    let mut u = vec![0.0; nn];
    let mut v = vec![0.0; nn];
    for j in 0..n as isize {
        for i in 0..n as isize {
            let k = at(i, j);
            u[k] = ut[k] - dt / re * (psi[k] - psi[at(i - 1, j)]) / h;
            v[k] = vt[k] - dt / re * (psi[k] - psi[at(i, j - 1)]) / h;
        }
    }
    let mut pnew: Vec<f64> = pn.iter().zip(&psi).map(|(a, b)| a + b).collect();
    let mean = pnew.iter().sum::<f64>() / nn as f64;
    pnew.iter_mut().for_each(|x| *x -= mean);

    // Concentration with the logarithmic-mean flux form.
    let cn = &s.c.data;
    let q = |c: f64| permeaflow::model::q_of_c(c.max(1e-12), p.q_law).expect("q is defined");
    let d_face = |ka: usize, kb: usize| {
        let phi_f = 0.5 * (phi[ka] + phi[kb]);
        let q_f = 0.5 * (q(cn[ka]) + q(cn[kb]));
        effective_diffusivity(phi_f, q_f, p, PROFILE_A) / p.pe
    };
    let flux = |vel: f64, d: f64, cl: f64, cr: f64| vel * log_mean(cl, cr) - d / h * 0.5 * (cl + cr) * (cr.ln() - cl.ln());
    let conc = |c: &[f64]| -> Vec<f64> {
        let mut r: Vec<f64> = c.iter().zip(cn).map(|(a, b)| (a - b) / dt).collect();
        for j in 0..n as isize {
            for i in 0..n as isize {
                let k = at(i, j);
                let l = at(i - 1, j);
                let fx = flux(u[k], d_face(l, k), c[l], c[k]) / h;
                r[l] += fx;
                r[k] -= fx;
                let b = at(i, j - 1);
                let fy = flux(v[k], d_face(b, k), c[b], c[k]) / h;
                r[b] += fy;
                r[k] -= fy;
            }
        }
        r
    };
    let (c, sweeps_c) = fixed_point(&conc, cn.clone(), 1e-7, 1e-14);
    OracleStep {
        phi,
        mu,
        u,
        v,
        p: pnew,
        c,
        sweeps: (sweeps_a, sweeps_c),
    }
}

/// Largest difference between the scheme state and the oracle, per field,
/// relative to `max(1, |field|)`.
pub fn compare(s: &State, o: &OracleStep) -> Vec<(&'static str, f64)> {
    let (u, v) = unique_faces(s);
    let rel = |a: &[f64], b: &[f64]| {
        let d = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        d / max_abs(b).max(1.0)
    };
    vec![
        ("phi", rel(&s.phi.data, &o.phi)),
        ("mu", rel(&s.mu.data, &o.mu)),
        ("u", rel(&u, &o.u)),
        ("v", rel(&v, &o.v)),
        ("p", rel(&s.p.data, &o.p)),
        ("c", rel(&s.c.data, &o.c)),
    ]
}
