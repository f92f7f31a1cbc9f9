mod common;

use common::*;
use derham_ns::linalg::{
    banded_factor_solve, cg_solve, cg_solve_scaled, dot, norm2, KronSolver, SkylineCholesky, SparseMatrix,
};
use derham_ns::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// `Rᵀ R + I` for a random `n × n` matrix `R`.
fn random_spd(n: usize, seed: u64) -> (SparseMatrix, DMatrix<f64>) {
    let r = DMatrix::from_row_slice(n, n, &random_vec(n * n, seed));
    let a = r.transpose() * &r + DMatrix::identity(n, n);
    let mut row_major = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            row_major.push(a[(i, j)]);
        }
    }
    (SparseMatrix::from_dense(n, n, &row_major), a)
}

#[test]
fn cg_matches_dense_factorization_on_random_spd() {
    let (a, dense_a) = random_spd(50, 1);
    let b = random_vec(50, 2);
    let (x, report) = cg_solve(&a, &b, 1e-13, 500).unwrap();
    assert!(report.converged);
    let oracle = dense_a.lu().solve(&dvec(&b)).unwrap();
    assert!(rel_diff(&x, oracle.as_slice()) < 1e-10);
    let mut r = a.matvec(&x);
    r.iter_mut().zip(&b).for_each(|(ri, bi)| *ri = bi - *ri);
    assert!((norm2(&r) / norm2(&b) - report.residual).abs() < 1e-14);
}

#[test]
fn scaled_cg_measures_against_the_reference() {
    let (a, _) = random_spd(30, 3);
    let b: Vec<f64> = random_vec(30, 4).iter().map(|v| 1e-12 * v).collect();
    let reference = 1.0;
    let mut x = vec![0.0; 30];
    let report = cg_solve_scaled(&a, &b, &mut x, 1e-8, reference, 500).unwrap();
    assert!(report.converged);
    // A target of 1e-8 against ‖b‖ would need far more work; against the
    // reference the first iterations already meet it.
    let mut plain = vec![0.0; 30];
    let strict = cg_solve_scaled(&a, &b, &mut plain, 1e-8, 0.0, 500).unwrap();
    assert!(report.iterations < strict.iterations, "{} {}", report.iterations, strict.iterations);
    let ax = a.matvec(&x);
    let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    assert!(res <= 1e-8 * reference);
}

#[test]
fn indefinite_banded_input_is_an_error() {
    let m = SparseMatrix::diagonal(&[1.0, -2.0, 3.0]);
    assert!(matches!(SkylineCholesky::factor(&m), Err(Error::Factorization { .. })));
    assert!(banded_factor_solve(&m, &[1.0, 1.0, 1.0]).is_err());
}

#[test]
fn kronecker_solver_inverts_the_assembled_product() {
    let tri = |n: usize, h: f64| {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 4.0 * h / 6.0;
            if i + 1 < n {
                d[i * n + i + 1] = h / 6.0;
                d[(i + 1) * n + i] = h / 6.0;
            }
        }
        SparseMatrix::from_dense(n, n, &d)
    };
    let (mx, my) = (tri(7, 0.25), tri(5, 0.5));
    let solver = KronSolver::new(&mx, &my).unwrap();
    let b = random_vec(35, 9);
    let x = solver.solve(&b).unwrap();
    let back = mx.kron(&my).matvec(&x);
    assert!(max_diff(&back, &b) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cg_solution_satisfies_the_system(n in 2usize..40, seed in 0u64..1000) {
        let (a, _) = random_spd(n, seed);
        let b = random_vec(n, seed + 7);
        let (x, report) = cg_solve(&a, &b, 1e-12, 10 * n).unwrap();
        prop_assert!(report.converged);
        prop_assert!(report.residual <= 1e-12 * 10.0);
        // xᵀ A x = xᵀ b at the solution.
        let lhs = dot(&x, &a.matvec(&x));
        prop_assert!((lhs - dot(&x, &b)).abs() <= 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn banded_solve_inverts_spd_band(n in 2usize..30, seed in 0u64..1000) {
        // Diagonally dominant pentadiagonal matrix.
        let off = random_vec(2 * n, seed);
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 5.0;
            for (k, o) in [(1, off[i]), (2, off[n + i])] {
                if i + k < n {
                    d[i * n + i + k] = o;
                    d[(i + k) * n + i] = o;
                }
            }
        }
        let m = SparseMatrix::from_dense(n, n, &d);
        let b = random_vec(n, seed + 1);
        let x = banded_factor_solve(&m, &b).unwrap();
        prop_assert!(max_diff(&m.matvec(&x), &b) < 1e-12);
    }
}
