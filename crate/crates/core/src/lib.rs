//! Discrete heat and Poisson semigroups generated by the Jacobi-polynomial
//! recurrence matrix, with numerical tools for checking their kernel
//! estimates and weighted maximal inequalities.

// `!(x > y)` guards deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod jacobi;
pub mod kernel;
pub mod quadrature;
pub mod semigroup;
pub mod sequence;
pub mod special;

pub use error::{Error, Result};
pub use jacobi::{CoefficientTable, JacobiParams};
pub use quadrature::{QuadratureRule, TridiagonalEigen};
pub use sequence::FiniteSequence;
