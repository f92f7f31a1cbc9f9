use serde::{Deserialize, Serialize};

use super::sparse::{axpy, dot, norm2, SparseMatrix};
use crate::error::{check_len, Error, Result};

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearSolveReport {
    pub iterations: usize,
    /// Relative residual `‖b - A x‖ / ‖b‖`, recomputed from scratch at exit.
    pub residual: f64,
    pub converged: bool,
}

/// A square operator known only through its action on vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

/// Adapter turning a closure into a [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// Conjugate gradients for symmetric positive (semi-)definite operators,
/// starting from the zero vector.
pub fn cg_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, LinearSolveReport)> {
    let mut x = vec![0.0; a.dim()];
    let report = cg_solve_from(a, b, &mut x, tol, max_iter)?;
    Ok((x, report))
}

/// Conjugate gradients warm-started from the contents of `x`.
///
/// Convergence is declared on the recursively updated residual; the reported
/// residual is recomputed as `‖b - A x‖ / ‖b‖` once the loop exits so callers
/// never see the drifted value.
pub fn cg_solve_from<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<LinearSolveReport> {
    cg_solve_scaled(a, b, x, tol, 0.0, max_iter)
}

/// Like [`cg_solve_from`], but residuals are measured against
/// `max(‖b‖, reference)`. Useful when `b` is a small difference of large
/// terms and a relative target on `‖b‖` alone would sit below roundoff.
pub fn cg_solve_scaled<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    reference: f64,
    max_iter: usize,
) -> Result<LinearSolveReport> {
    let n = a.dim();
    check_len(n, b.len(), "cg right-hand side")?;
    check_len(n, x.len(), "cg initial guess")?;
    if b.iter().chain(x.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NumericalBreakdown(
            "non-finite input to conjugate gradients".into(),
        ));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(LinearSolveReport {
            iterations: 0,
            residual: 0.0,
            converged: true,
        });
    }

    let bnorm = bnorm.max(reference);

    let true_residual = |x: &[f64], ax: &mut Vec<f64>| {
        a.apply(x, ax);
        let r: Vec<f64> = b.iter().zip(ax.iter()).map(|(bi, ai)| bi - ai).collect();
        r
    };

    let mut ax = vec![0.0; n];
    let mut r = true_residual(x, &mut ax);
    let mut iterations = 0;
    // A couple of restarts guard against the recursive residual drifting below
    // the true one on ill-conditioned systems.
    for _restart in 0..4 {
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let mut ap = vec![0.0; n];
        while rr.sqrt() > tol * bnorm && iterations < max_iter {
            a.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !pap.is_finite() || !rr.is_finite() {
                return Err(Error::NumericalBreakdown(format!(
                    "conjugate gradients produced non-finite curvature at iteration {iterations}"
                )));
            }
            if pap <= 0.0 {
                // Direction in the null space of a semi-definite operator.
                break;
            }
            let alpha = rr / pap;
            axpy(alpha, &p, x);
            axpy(-alpha, &ap, &mut r);
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
            rr = rr_new;
            iterations += 1;
        }
        r = true_residual(x, &mut ax);
        let rel = norm2(&r) / bnorm;
        if rel <= tol || iterations >= max_iter {
            break;
        }
    }
    let residual = norm2(&r) / bnorm;
    if !residual.is_finite() {
        return Err(Error::NumericalBreakdown(
            "conjugate gradients residual is not finite".into(),
        ));
    }
    Ok(LinearSolveReport {
        iterations,
        residual,
        converged: residual <= tol,
    })
}
