//! Two-factor Kronecker products acting on row-major coefficient arrays.
//!
//! A vector `x` of length `na·nb` is read as an `na × nb` row-major array
//! `X[ia][ib] = x[ia·nb + ib]`, so that `(A ⊗ B) x` is `A X Bᵀ`.

use super::banded::SkylineCholesky;
use super::sparse::SparseMatrix;
use crate::error::{check_len, Result};

/// `y = (A ⊗ B) x` without assembling the product.
pub fn kron_apply(a: &SparseMatrix, b: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    let (na_in, nb_in) = (a.cols(), b.cols());
    let (na_out, nb_out) = (a.rows(), b.rows());
    assert_eq!(x.len(), na_in * nb_in, "kron_apply input length");
    // T = X Bᵀ  (na_in × nb_out)
    let mut t = vec![0.0; na_in * nb_out];
    for ia in 0..na_in {
        let xr = &x[ia * nb_in..(ia + 1) * nb_in];
        let tr = &mut t[ia * nb_out..(ia + 1) * nb_out];
        b.matvec_into(xr, tr);
    }
    // Y = A T
    let mut y = vec![0.0; na_out * nb_out];
    for ia in 0..na_out {
        let yr = &mut y[ia * nb_out..(ia + 1) * nb_out];
        let (cols, vals) = a.row(ia);
        for (&c, &v) in cols.iter().zip(vals) {
            let tr = &t[c * nb_out..(c + 1) * nb_out];
            for (yi, ti) in yr.iter_mut().zip(tr) {
                *yi += v * ti;
            }
        }
    }
    y
}

/// Factor-wise inverse of `A ⊗ B` for SPD factors.
#[derive(Clone, Debug)]
pub struct KronSolver {
    a: SkylineCholesky,
    b: SkylineCholesky,
}

impl KronSolver {
    pub fn new(a: &SparseMatrix, b: &SparseMatrix) -> Result<Self> {
        Ok(Self {
            a: SkylineCholesky::factor(a)?,
            b: SkylineCholesky::factor(b)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.dim() * self.b.dim()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (na, nb) = (self.a.dim(), self.b.dim());
        debug_assert_eq!(x.len(), na * nb);
        for ia in 0..na {
            self.b.solve_in_place(&mut x[ia * nb..(ia + 1) * nb]);
        }
        let mut work = Vec::with_capacity(na);
        for ib in 0..nb {
            self.a.solve_strided(x, ib, nb, &mut work);
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), rhs.len(), "kronecker solve right-hand side")?;
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }
}
