//! Spectral-Galerkin simulation of a Westervelt pressure field coupled to a hinged plate.

pub mod assembly;
pub mod basis;
pub mod energy;
pub mod error;
pub mod expoly;
pub mod fields;
pub mod geometry;
pub mod linear;
pub mod mms;
pub mod nonlinear;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod signals;
pub mod study;
pub mod trajectory;
pub mod trig;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/library.md")]
    mod library {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
