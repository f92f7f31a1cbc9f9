//! Weak (dual) differential operators, interior products, the
//! skew-symmetric advection form, the viscous form and boundary terms.

mod boundary;
mod context;

pub use boundary::{BoundaryCondition, BoundaryKind, BoundarySpec, Edge};
pub use context::{BoundaryMode, OperatorContext};
