//! Ginzburg-Landau minimization with degree-one boundary conditions on
//! circular annuli, the H¹-capacity of the annulus, and the closed-form
//! mode reduction of the associated quadratic problem.
//!
//! Modules:
//! - [`geometry`]: annuli, capacity, thick/thin classification
//! - [`field`]: order-parameter fields on the log-polar rectangle
//! - [`minimizer`]: constrained descent and κ-continuation
//! - [`spectral`]: mode coefficients, boundary-value problems, certificates

pub mod error;
pub mod field;
pub mod geometry;
pub mod minimizer;
mod numerics;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ComplexField, Side};
pub use geometry::{Annulus, Classification};
pub use num_complex::Complex64;
