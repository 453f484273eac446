//! Finite element tools for the one-dimensional logarithmic and fractional
//! Laplacian on an interval: closed-form stiffness matrices, Dirichlet
//! solves, spectra, and convergence studies.

// `!(x > 0.0)` is used on purpose so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod asymptotic;
pub mod assembly;
pub mod error;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod spectral;

pub use assembly::SymMatrix;
pub use error::{Error, Result};
pub use mesh::{FemFunction, Mesh};
