//! Incompressible Navier–Stokes on conforming and broken spline de Rham
//! sequences: structure-preserving spaces and operators, a Crank–Nicolson
//! Picard stepper, diagnostics and a library of test cases.
//!
//! The guide in `book/` walks through the pieces; its code blocks run as
//! doc-tests of this crate.

pub mod cases;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod multipatch;
pub mod operators;
pub mod spline;
pub mod stepper;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/broken.md")]
    mod broken {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/stepping.md")]
    mod stepping {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
