//! Dense operator-theory numerics for numerical ranges, K-spectral sets,
//! double-layer semispectral measures, Riesz decompositions and the
//! Gleason-part structure of model function algebras.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the scenario
//! runner and the command-line tool live in the `sdl` crate.

#![no_std]
// NaN must fail validation, so `!(x > 0.0)` is intended; dense kernels index
// several arrays by the same loop variable
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod convex;
pub mod curve;
pub mod decomposition;
pub mod error;
pub mod gleason;
pub mod kspectral;
pub mod linalg;
pub mod np;
pub mod random;
pub mod rational;
pub mod sampler;
mod search;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigen, C64};
