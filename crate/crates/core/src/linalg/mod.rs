//! Sparse, banded and Kronecker linear algebra plus Gauss quadrature.

mod banded;
mod cg;
mod dense;
mod kron;
mod quadrature;
mod sparse;

pub use banded::{banded_factor_solve, SkylineCholesky};
pub use cg::{cg_solve, cg_solve_from, cg_solve_scaled, FnOperator, LinearOperator, LinearSolveReport};
pub use dense::solve_dense;
pub use kron::{kron_apply, KronSolver};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use sparse::{axpy, dot, norm2, SparseMatrix, TripletBuilder};
