//! Oblique projections that are self-adjoint for a positive semidefinite
//! weight, Douglas reduced solutions, the Hilbert structure of the operator
//! range `R(A^{1/2})`, and minimal-seminorm interpolation.
//!
//! All routines work on dense real matrices and treat rank decisions through
//! an explicit [`Tolerance`].

pub mod douglas;
mod error;
pub mod interpolant;
pub mod io;
pub mod kernel;
pub mod oblique;
pub mod oprange;
pub mod sampling;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use kernel::{ObliqueProjection, Operator, PsdOperator, Subspace, Tolerance};
