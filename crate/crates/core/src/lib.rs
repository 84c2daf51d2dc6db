//! Constructive majorisation.
//!
//! * [`majorization`]: deciding `x ≺ y`, T-transform decompositions and
//!   doubly stochastic matrices.
//! * [`schur_horn`]: Hermitian matrices with prescribed diagonal and
//!   spectrum, and finite projections with prescribed diagonal.
//! * [`carpenter`]: diagonals of projections on `l^2(N)`, decided exactly
//!   from closed-form sequence descriptions and built at truncation depth.
//! * [`linalg`]: the dense complex arithmetic underneath.
//! * [`io`]: JSON file formats shared with the command-line tool.

pub mod carpenter;
pub mod error;
pub mod io;
pub mod linalg;
pub mod majorization;
pub mod schur_horn;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexScalar, ToleranceConfig};
pub use num_complex::Complex64;

#[cfg(test)]
pub(crate) mod test_support;
