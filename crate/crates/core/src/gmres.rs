//! Left-preconditioned GMRES with modified Gram-Schmidt and Givens rotations.

use std::time::Instant;

use crate::error::{check_len, Error, Result};
use crate::operator::LinearOperator;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct GmresOptions<T> {
    /// Stop when `‖P(b − A x)‖ ≤ tol · ‖P b‖`.
    pub tol: T,
    /// Largest Krylov dimension of one cycle.
    pub max_krylov: usize,
    /// Number of cycles; `None` runs a single cycle without restarting.
    pub restart: Option<usize>,
}

impl<T: Real> Default for GmresOptions<T> {
    fn default() -> Self {
        Self { tol: T::of(1e-8), max_krylov: 100, restart: None }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub iterations: usize,
    /// Relative preconditioned residual estimates, starting with 1.
    pub residual_history: Vec<T>,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    pub preconditioner_time_fraction: f64,
    /// `‖b − A x‖ / ‖b‖` of the returned iterate.
    pub true_relative_residual: T,
}

fn norm<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

struct Timed<'a, T> {
    a: &'a dyn LinearOperator<T>,
    p: Option<&'a dyn LinearOperator<T>>,
    prec_secs: f64,
}

impl<T: Real> Timed<'_, T> {
    fn precondition(&mut self, x: Vec<T>) -> Vec<T> {
        match self.p {
            None => x,
            Some(p) => {
                let t = Instant::now();
                let mut y = vec![T::zero(); x.len()];
                p.apply_into(&x, &mut y);
                self.prec_secs += t.elapsed().as_secs_f64();
                y
            }
        }
    }

    fn residual(&self, b: &[T], x: &[T]) -> Vec<T> {
        let mut ax = vec![T::zero(); b.len()];
        self.a.apply_into(x, &mut ax);
        b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect()
    }
}

/// Solves `A x = b` from `x₀ = 0` with optional left preconditioner `p ≈ A⁻¹`.
pub fn solve<T: Real>(
    a: &dyn LinearOperator<T>,
    p: Option<&dyn LinearOperator<T>>,
    b: &[T],
    opts: &GmresOptions<T>,
) -> Result<(Vec<T>, SolveReport<T>)> {
    let start = Instant::now();
    let n = a.dim();
    check_len(n, b.len())?;
    if let Some(p) = p {
        check_len(n, p.dim())?;
    }
    if !(opts.tol > T::zero()) || opts.max_krylov == 0 || opts.restart == Some(0) {
        return Err(Error::InvalidArgument(
            "tolerance must be positive and Krylov dimension and cycle count at least one".into(),
        ));
    }
    let mut ops = Timed { a, p, prec_secs: 0.0 };
    let mut x = vec![T::zero(); n];
    let mut history = vec![T::one()];
    let bnorm = norm(b);
    let finish = |x: Vec<T>, history: Vec<T>, iterations, converged, ops: &Timed<'_, T>| {
        let r = ops.residual(b, &x);
        let true_rel = if bnorm > T::zero() { norm(&r) / bnorm } else { T::zero() };
        let wall = start.elapsed().as_secs_f64();
        let report = SolveReport {
            iterations,
            residual_history: history,
            converged,
            wall_time: wall,
            preconditioner_time_fraction: if wall > 0.0 { (ops.prec_secs / wall).min(1.0) } else { 0.0 },
            true_relative_residual: true_rel,
        };
        (x, report)
    };
    if bnorm == T::zero() {
        return Ok(finish(x, history, 0, true, &ops));
    }
    let mut r = ops.precondition(b.to_vec());
    let beta0 = norm(&r);
    if beta0 == T::zero() {
        return Ok(finish(x, history, 0, true, &ops));
    }
    let m = opts.max_krylov;
    let cycles = opts.restart.unwrap_or(1);
    let mut iterations = 0;
    for cycle in 0..cycles {
        if cycle > 0 {
            r = ops.precondition(ops.residual(b, &x));
        }
        let beta = norm(&r);
        if beta <= opts.tol * beta0 {
            return Ok(finish(x, history, iterations, true, &ops));
        }
        let mut v: Vec<Vec<T>> = vec![r.iter().map(|&ri| ri / beta).collect()];
        // Hessenberg columns, rotated in place
        let mut h: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut cs: Vec<T> = Vec::with_capacity(m);
        let mut sn: Vec<T> = Vec::with_capacity(m);
        let mut g = vec![beta];
        let mut converged = false;
        for j in 0..m {
            let mut av = vec![T::zero(); n];
            a.apply_into(&v[j], &mut av);
            let mut w = ops.precondition(av);
            let wnorm0 = norm(&w);
            let mut col = Vec::with_capacity(j + 2);
            for vi in &v {
                let hij = dot(&w, vi);
                w.iter_mut().zip(vi).for_each(|(wk, &vk)| *wk -= hij * vk);
                col.push(hij);
            }
            let hnext = norm(&w);
            col.push(hnext);
            for i in 0..j {
                let (c, s) = (cs[i], sn[i]);
                let (h0, h1) = (col[i], col[i + 1]);
                col[i] = c * h0 + s * h1;
                col[i + 1] = c * h1 - s * h0;
            }
            let (h0, h1) = (col[j], col[j + 1]);
            let rr = (h0 * h0 + h1 * h1).sqrt();
            let (c, s) = if rr == T::zero() { (T::one(), T::zero()) } else { (h0 / rr, h1 / rr) };
            col[j] = rr;
            col[j + 1] = T::zero();
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            h.push(col);
            iterations += 1;
            let rel = g[j + 1].abs() / beta0;
            history.push(rel);
            let breakdown = hnext <= T::eps() * wnorm0;
            if rel <= opts.tol || breakdown {
                converged = true;
                break;
            }
            if j + 1 < m {
                v.push(w.iter().map(|&wk| wk / hnext).collect());
            }
        }
        // back substitution for the least-squares coefficients
        let k = h.len();
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let s: T = (i + 1..k).map(|l| h[l][i] * y[l]).sum();
            y[i] = if h[i][i] == T::zero() { T::zero() } else { (g[i] - s) / h[i][i] };
        }
        for (yi, vi) in y.iter().zip(&v) {
            x.iter_mut().zip(vi).for_each(|(xk, &vk)| *xk += *yi * vk);
        }
        if converged {
            return Ok(finish(x, history, iterations, true, &ops));
        }
    }
    Ok(finish(x, history, iterations, false, &ops))
}
