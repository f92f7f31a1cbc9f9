use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre, solve_dense, SparseMatrix, TripletBuilder};
use crate::spline::{BrokenSpace1D, SplineSpace1D};

/// Symmetric interface-averaging stencil of a 1D conforming projection.
///
/// `c[0] = c_prime[0] = 1/2` and `c_prime[i] = -c[i]` for `i > 0`. The
/// projected interface function is
/// `P φ_{k,0} = Σ_i c_i φ_{k,i} + c'_i φ_{k-1,N-i}` and symmetrically for
/// `φ_{k-1,N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionStencil1D {
    pub radius: usize,
    /// Highest polynomial degree whose moments are preserved, if any.
    pub moment_order: Option<usize>,
    pub c: Vec<f64>,
    pub c_prime: Vec<f64>,
}

/// Stencil for clamped splines of `degree` on segments of `n_cells` uniform
/// cells.
///
/// With `radius == 0` the stencil is plain averaging of the two interface
/// values. Otherwise the coefficients solve the local moment conditions
/// `Σ_{i=1..r} c_i ∫ φ_i (x - x_k)^j = ½ ∫ φ_0 (x - x_k)^j`, `j = 0..=moment_order`,
/// which needs `radius >= moment_order + 1`; extra radius is resolved by the
/// minimum-norm solution.
pub fn projection_stencil_1d(
    degree: usize,
    n_cells: usize,
    radius: usize,
    moment_order: usize,
) -> Result<ProjectionStencil1D> {
    if radius == 0 {
        return Ok(ProjectionStencil1D {
            radius,
            moment_order: None,
            c: vec![0.5],
            c_prime: vec![0.5],
        });
    }
    let seg = SplineSpace1D::new(degree, n_cells, (0.0, 1.0), false)?;
    let last = seg.dim() - 1;
    if radius + 1 > last {
        return Err(Error::DegenerateStencil(format!(
            "radius {radius} reaches the opposite boundary DOF of a segment with {} basis functions",
            seg.dim()
        )));
    }
    let m = moment_order + 1;
    if radius < m {
        return Err(Error::DegenerateStencil(format!(
            "radius {radius} cannot satisfy {m} moment conditions"
        )));
    }
    // moments[i][j] = ∫ φ_i x^j on the reference segment (x_k = 0).
    let rule = gauss_legendre((degree + moment_order) / 2 + 2)?;
    let mut moments = vec![vec![0.0; m]; radius + 1];
    let mut vals = vec![0.0; degree + 1];
    let bp = seg.breakpoints();
    for cell in 0..seg.n_cells() {
        for (x, w) in rule.mapped(bp[cell], bp[cell + 1]) {
            seg.eval_cell(cell, x, &mut vals);
            for (l, &v) in vals.iter().enumerate() {
                let i = seg.global_index(cell, l);
                if i <= radius {
                    for (j, mij) in moments[i].iter_mut().enumerate() {
                        *mij += w * v * x.powi(j as i32);
                    }
                }
            }
        }
    }
    // G c = rhs with G[j][i-1] = moments[i][j]; min-norm c = Gᵀ (G Gᵀ)⁻¹ rhs.
    let rhs: Vec<f64> = (0..m).map(|j| 0.5 * moments[0][j]).collect();
    let g = |j: usize, i: usize| moments[i + 1][j];
    let mut ggt = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            ggt[a * m + b] = (0..radius).map(|i| g(a, i) * g(b, i)).sum();
        }
    }
    let y = solve_dense(m, ggt, rhs).ok_or_else(|| {
        Error::DegenerateStencil(format!(
            "singular moment system for degree {degree}, radius {radius}, moment order {moment_order}"
        ))
    })?;
    let mut c = vec![0.5];
    c.extend((0..radius).map(|i| (0..m).map(|j| g(j, i) * y[j]).sum::<f64>()));
    let c_prime = c.iter().enumerate().map(|(i, &v)| if i == 0 { 0.5 } else { -v }).collect();
    Ok(ProjectionStencil1D {
        radius,
        moment_order: Some(moment_order),
        c,
        c_prime,
    })
}

impl ProjectionStencil1D {
    /// Conforming projection of a broken 1D space: identity away from the
    /// interfaces, stencil columns on the two DOFs of each interface.
    pub fn projection_matrix(&self, space: &BrokenSpace1D) -> SparseMatrix {
        let n = space.dim();
        let mut interface_cols = vec![false; n];
        let mut t = TripletBuilder::with_capacity(n, n, n + 8 * self.radius * space.n_segments());
        for itf in space.interfaces() {
            let r0 = space.first_dof(itf.right);
            let ln = space.last_dof(itf.left);
            interface_cols[r0] = true;
            interface_cols[ln] = true;
            for i in 0..=self.radius {
                // Column r0: P φ_{k,0}; column ln: P φ_{k-1,N}.
                t.push(r0 + i, r0, self.c[i]);
                t.push(ln - i, r0, self.c_prime[i]);
                t.push(r0 + i, ln, self.c_prime[i]);
                t.push(ln - i, ln, self.c[i]);
            }
        }
        for (j, is_itf) in interface_cols.into_iter().enumerate() {
            if !is_itf {
                t.push(j, j, 1.0);
            }
        }
        t.finalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn radius_zero_is_plain_average() {
        let s = projection_stencil_1d(3, 4, 0, 2).unwrap();
        assert_eq!(s.c, vec![0.5]);
        assert_eq!(s.c_prime, vec![0.5]);
        assert_eq!(s.moment_order, None);
    }

    #[test]
    fn symmetric_structure() {
        let s = projection_stencil_1d(3, 4, 3, 2).unwrap();
        assert_eq!(s.c[0], 0.5);
        assert_eq!(s.c_prime[0], 0.5);
        for i in 1..=3 {
            assert_eq!(s.c_prime[i], -s.c[i]);
        }
    }

    #[test]
    fn linear_radius_one_ratio() {
        // Hat functions on uniform cells: ∫φ_0 = h/2, ∫φ_1 = h.
        let s = projection_stencil_1d(1, 4, 1, 0).unwrap();
        assert_abs_diff_eq!(s.c[1], 0.5 * 0.5 / 1.0, epsilon = 1e-14);
    }

    #[test]
    fn too_small_radius_is_rejected() {
        assert!(matches!(
            projection_stencil_1d(2, 4, 1, 2),
            Err(Error::DegenerateStencil(_))
        ));
        assert!(matches!(
            projection_stencil_1d(2, 2, 3, 2),
            Err(Error::DegenerateStencil(_))
        ));
    }

    #[test]
    fn projection_matrix_is_idempotent() {
        for (deg, cells, nseg, periodic) in [(2, 2, 2, false), (3, 4, 3, true), (2, 3, 2, true)] {
            let space = BrokenSpace1D::new(deg, nseg, cells, (0.0, 1.0), periodic).unwrap();
            let s = projection_stencil_1d(deg, cells, deg, deg - 1).unwrap();
            let p = s.projection_matrix(&space);
            let pp = p.matmul(&p).unwrap();
            assert!(pp.max_abs_diff(&p) <= 1e-13);
        }
    }
}
