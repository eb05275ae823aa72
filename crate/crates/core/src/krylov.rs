//! Unpreconditioned BiCGSTAB for a matrix-free linear operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Result};

/// Outcome of a BiCGSTAB solve.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Operator applications, including the initial residual.
    pub applies: usize,
    pub converged: bool,
    /// A scalar recurrence coefficient vanished before convergence.
    pub breakdown: bool,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Solves `A x = rhs` starting from `x0`, stopping once
/// `‖rhs − A x‖₂ ≤ rel_tol·‖rhs‖₂`. `apply(v, out)` writes `A v` into `out`.
pub fn bicgstab<F>(mut apply: F, rhs: &[f64], x0: &[f64], rel_tol: f64, max_iters: usize) -> Result<KrylovResult>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = rhs.len();
    check_len(n, x0.len())?;
    let mut x = x0.to_vec();
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok(KrylovResult {
            x: vec![0.0; n],
            iterations: 0,
            applies: 0,
            converged: true,
            breakdown: false,
            relative_residual: 0.0,
        });
    }
    let target = rel_tol * bnorm;

    let mut r = vec![0.0; n];
    apply(&x, &mut r);
    let mut applies = 1;
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let mut rnorm = norm(&r);
    let done = |x: Vec<f64>, iterations, applies, converged, breakdown, rnorm: f64| {
        Ok(KrylovResult {
            x,
            iterations,
            applies,
            converged,
            breakdown,
            relative_residual: rnorm / bnorm,
        })
    };
    if rnorm <= target {
        return done(x, 0, applies, true, false, rnorm);
    }

    let r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);

    for iter in 1..=max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < f64::MIN_POSITIVE || !rho_new.is_finite() {
            return done(x, iter - 1, applies, false, true, rnorm);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(&p, &mut v);
        applies += 1;
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            return done(x, iter, applies, false, true, rnorm);
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let snorm = norm(&s);
        if snorm <= target {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return done(x, iter, applies, true, false, snorm);
        }
        apply(&s, &mut t);
        applies += 1;
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return done(x, iter, applies, false, true, rnorm);
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rnorm = norm(&r);
        if rnorm <= target {
            return done(x, iter, applies, true, false, rnorm);
        }
        if omega == 0.0 {
            return done(x, iter, applies, false, true, rnorm);
        }
    }
    done(x, max_iters, applies, false, false, rnorm)
}
