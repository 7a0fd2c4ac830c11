//! GMRES and flexible GMRES (right preconditioning, no restarts inside a cycle).

use crate::{dot, norm2, LinOp, Precond};

#[derive(Clone, Debug, Default)]
pub struct GmresReport {
    pub iterations: usize,
    pub converged: bool,
    /// Arnoldi residual estimates ‖b − A x_j‖, starting with the initial residual.
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct FgmresReport {
    pub iterations: usize,
    pub converged: bool,
    /// True relative residual ‖b − A x‖ / ‖b‖ at exit.
    pub relative_residual: f64,
    pub residuals: Vec<f64>,
}

struct Cycle {
    iterations: usize,
    stopped_on_tol: bool,
}

/// One Arnoldi cycle from the current `x`; preconditioned directions are kept
/// (flexible form), so a varying preconditioner is allowed.
fn cycle<A: LinOp + ?Sized, P: Precond + ?Sized>(
    a: &A,
    pc: &P,
    b: &[f64],
    x: &mut [f64],
    max_it: usize,
    tol_abs: f64,
    hist: &mut Vec<f64>,
) -> Cycle {
    let n = b.len();
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let beta = norm2(&r);
    if hist.is_empty() {
        hist.push(beta);
    }
    if beta <= tol_abs || beta == 0.0 || max_it == 0 {
        return Cycle { iterations: 0, stopped_on_tol: beta <= tol_abs };
    }
    for ri in r.iter_mut() {
        *ri /= beta;
    }
    let mut v: Vec<Vec<f64>> = vec![r];
    let mut z: Vec<Vec<f64>> = Vec::new();
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut stopped_on_tol = false;
    let mut its = 0;
    for j in 0..max_it {
        let mut zj = vec![0.0; n];
        pc.apply(&v[j], &mut zj);
        let mut w = vec![0.0; n];
        a.apply(&zj, &mut w);
        let mut col = vec![0.0; j + 2];
        for (i, vi) in v.iter().enumerate() {
            let hij = dot(&w, vi);
            col[i] = hij;
            for (wk, vk) in w.iter_mut().zip(vi) {
                *wk -= hij * vk;
            }
        }
        let hnext = norm2(&w);
        col[j + 1] = hnext;
        let colnorm = norm2(&col);
        for i in 0..j {
            let t = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        let (c, s) = givens(col[j], col[j + 1]);
        col[j] = c * col[j] + s * col[j + 1];
        col[j + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);
        h.push(col);
        z.push(zj);
        its = j + 1;
        let res = g[j + 1].abs();
        hist.push(res);
        let breakdown = hnext <= 1e-14 * colnorm;
        if res <= tol_abs {
            stopped_on_tol = true;
            break;
        }
        if breakdown {
            break;
        }
        for wk in w.iter_mut() {
            *wk /= hnext;
        }
        v.push(w);
    }
    // back substitution H y = g
    let m = its;
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for k in i + 1..m {
            s -= h[k][i] * y[k];
        }
        y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
    }
    for (k, zk) in z.iter().enumerate() {
        let yk = y[k];
        for (xi, zi) in x.iter_mut().zip(zk) {
            *xi += yk * zi;
        }
    }
    Cycle { iterations: its, stopped_on_tol }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Right-preconditioned GMRES; stops when the residual estimate drops below
/// `rtol`·‖r₀‖ or after `max_it` iterations. With `rtol = 0` it performs
/// exactly `max_it` iterations unless a happy breakdown occurs.
pub fn gmres<A: LinOp + ?Sized, P: Precond + ?Sized>(
    a: &A,
    pc: &P,
    b: &[f64],
    x: &mut [f64],
    max_it: usize,
    rtol: f64,
) -> GmresReport {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r0 = norm2(&r);
    let mut hist = Vec::new();
    let c = cycle(a, pc, b, x, max_it, rtol * r0, &mut hist);
    GmresReport { iterations: c.iterations, converged: c.stopped_on_tol, residuals: hist }
}

/// Flexible GMRES converging on the true relative residual ‖b − A x‖/‖b‖.
/// When the Arnoldi estimate and the true residual disagree the iteration is
/// continued from the current iterate; the count keeps accumulating.
pub fn fgmres<A: LinOp + ?Sized, P: Precond + ?Sized>(
    a: &A,
    pc: &P,
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_it: usize,
) -> FgmresReport {
    let bnorm = norm2(b);
    let mut r = vec![0.0; b.len()];
    let true_res = |x: &[f64], r: &mut [f64]| {
        a.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        norm2(r)
    };
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return FgmresReport { iterations: 0, converged: true, relative_residual: 0.0, residuals: vec![0.0] };
    }
    let tol = rtol * bnorm;
    let mut total = 0;
    let mut hist = Vec::new();
    let mut res = true_res(x, &mut r);
    let mut prev = f64::INFINITY;
    while res > tol && total < max_it {
        let mut h = Vec::new();
        let c = cycle(a, pc, b, x, max_it - total, tol, &mut h);
        total += c.iterations;
        if hist.is_empty() {
            hist.extend(h);
        } else {
            hist.extend(h.into_iter().skip(1));
        }
        res = true_res(x, &mut r);
        if c.iterations == 0 || (!c.stopped_on_tol && c.iterations < max_it - (total - c.iterations) && res >= prev) {
            break;
        }
        if c.stopped_on_tol && res > tol && res > 0.9 * prev {
            break;
        }
        prev = res;
    }
    FgmresReport { iterations: total, converged: res <= tol, relative_residual: res / bnorm, residuals: hist.into_iter().map(|v| v / bnorm).collect() }
}

struct LeftPreconditioned<'a, A: ?Sized, P: ?Sized> {
    a: &'a A,
    pc: &'a P,
}

impl<A: LinOp + ?Sized, P: Precond + ?Sized> LinOp for LeftPreconditioned<'_, A, P> {
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = vec![0.0; x.len()];
        self.a.apply(x, &mut t);
        self.pc.apply(&t, y);
    }
}

/// Left-preconditioned GMRES: minimizes ‖M⁻¹(b − A x)‖ over the Krylov space
/// of M⁻¹A. Stopping and the reported residuals refer to that norm.
pub fn gmres_left<A: LinOp + ?Sized, P: Precond + ?Sized>(
    a: &A,
    pc: &P,
    b: &[f64],
    x: &mut [f64],
    max_it: usize,
    rtol: f64,
) -> GmresReport {
    let op = LeftPreconditioned { a, pc };
    let mut mb = vec![0.0; b.len()];
    pc.apply(b, &mut mb);
    gmres(&op, &crate::IdentityPrecond, &mb, x, max_it, rtol)
}
