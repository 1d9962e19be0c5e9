use super::sparse::{CsrMatrix, Preconditioner};
use crate::error::{Error, Result};

/// Action of a square linear operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    /// Final relative residual `||b - Ax|| / ||b||`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(a: &mut [f64]) {
    let m = a.iter().sum::<f64>() / a.len() as f64;
    a.iter_mut().for_each(|x| *x -= m);
}

fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) {
    op.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Preconditioned conjugate gradients for symmetric positive (semi)definite
/// operators. With `singular` the iteration is kept orthogonal to constants.
pub fn cg(
    op: &dyn LinearOperator,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
    singular: bool,
) -> Result<KrylovStats> {
    let n = op.dim();
    let mut b = b.to_vec();
    if singular {
        remove_mean(&mut b);
        remove_mean(x);
    }
    let bn = norm(&b);
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats { iterations: 0, residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    residual(op, &b, x, &mut r);
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    if singular {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut res = norm(&r) / bn;
    for it in 0..max_iters {
        if res <= tol {
            return Ok(KrylovStats { iterations: it, residual: res });
        }
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq == 0.0 {
            break;
        }
        let alpha = rz / pq;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        res = norm(&r) / bn;
        pc.apply(&r, &mut z);
        if singular {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    if singular {
        remove_mean(x);
    }
    residual(op, &b, x, &mut r);
    res = norm(&r) / bn;
    if res <= tol {
        return Ok(KrylovStats { iterations: max_iters, residual: res });
    }
    Err(Error::NonConvergence { what: "conjugate gradient", iterations: max_iters, residual: res })
}

/// Right-preconditioned BiCGSTAB.
pub fn bicgstab(
    op: &dyn LinearOperator,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<KrylovStats> {
    let n = op.dim();
    let bn = norm(b);
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats { iterations: 0, residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    residual(op, b, x, &mut r);
    let mut res = norm(&r) / bn;
    if res <= tol {
        return Ok(KrylovStats { iterations: 0, residual: res });
    }
    let mut r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zs = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut restarts = 0;
    let mut it = 0;
    while it < max_iters {
        it += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 || omega == 0.0 {
            // breakdown: restart with the current residual as shadow vector
            restarts += 1;
            if restarts > 5 {
                break;
            }
            residual(op, b, x, &mut r);
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        pc.apply(&p, &mut y);
        op.apply(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            omega = 0.0;
            continue;
        }
        alpha = rho / rv;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) / bn <= tol {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            residual(op, b, x, &mut r);
            res = norm(&r) / bn;
            if res <= tol {
                return Ok(KrylovStats { iterations: it, residual: res });
            }
            continue;
        }
        pc.apply(&s, &mut zs);
        op.apply(&zs, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * y[k] + omega * zs[k];
            r[k] = s[k] - omega * t[k];
        }
        res = norm(&r) / bn;
        if res <= tol {
            // guard against drift of the recursive residual
            residual(op, b, x, &mut r);
            res = norm(&r) / bn;
            if res <= tol {
                return Ok(KrylovStats { iterations: it, residual: res });
            }
        }
    }
    residual(op, b, x, &mut r);
    res = norm(&r) / bn;
    Err(Error::NonConvergence { what: "BiCGSTAB", iterations: it, residual: res })
}

/// Restarted GMRES(`restart`) with right preconditioning.
pub fn gmres(
    op: &dyn LinearOperator,
    pc: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iters: usize,
) -> Result<KrylovStats> {
    let n = op.dim();
    let m = restart.max(1);
    let bn = norm(b);
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats { iterations: 0, residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    loop {
        residual(op, b, x, &mut r);
        let beta = norm(&r);
        let res = beta / bn;
        if res <= tol {
            return Ok(KrylovStats { iterations: total, residual: res });
        }
        if total >= max_iters {
            return Err(Error::NonConvergence { what: "GMRES", iterations: total, residual: res });
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            total += 1;
            pc.apply(&basis[k], &mut z);
            op.apply(&z, &mut w);
            for (i, vi) in basis.iter().enumerate() {
                let hik = dot(&w, vi);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let tmp = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = tmp;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k + 1][k];
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if g[k + 1].abs() / bn <= tol * 0.5 || hn == 0.0 || total >= max_iters {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut yk = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * yk[j];
            }
            yk[i] = s / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (j, yj) in yk.iter().enumerate() {
            for (u, vj) in update.iter_mut().zip(&basis[j]) {
                *u += yj * vj;
            }
        }
        pc.apply(&update, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}
