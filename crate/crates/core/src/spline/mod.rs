//! Spline spaces: 1D B-spline factors and tensor-product de Rham sequences.

mod broken1d;
mod derham;
mod field;
mod space1d;

pub use broken1d::{BrokenSpace1D, Interface1D};
pub use derham::{bilinear_order, build_derham_patch, trilinear_order, AffineMap, Axis, DeRhamPatch, DeRhamSequence};
pub use field::{eval_field, l2_project, Conformity, Field, Slot};
pub use space1d::{build_space_1d, SplineSpace1D};

/// Derivative incidence of a 1D space; see [`SplineSpace1D::derivative_incidence`].
pub fn derivative_incidence_1d(space: &SplineSpace1D) -> crate::Result<crate::linalg::SparseMatrix> {
    space.derivative_incidence()
}
