//! Broken multipatch spaces, moment-preserving conforming projections and the
//! jump penalization.

mod space;
mod stencil;

pub use space::{build_multipatch, MultipatchConfig, MultipatchSpace};
pub use stencil::{projection_stencil_1d, ProjectionStencil1D};
