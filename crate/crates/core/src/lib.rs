//! Numerical toolkit for the periodic Schrödinger operator, genus-zero
//! Baker–Akhiezer functions and KdV flows with self-consistent sources.
//!
//! Everything is generic over the floating point type through [`Real`];
//! the aliases at the crate root fix it to `f64`.

// Negated comparisons such as `!(x > 0)` are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ba;
pub mod error;
pub mod floquet;
pub mod grid;
pub mod kdv;
pub mod linalg;
pub mod scalar;
pub mod soliton;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type Grid = grid::PeriodicGrid<f64>;
pub type RealField = grid::Field<f64>;
pub type Potential = floquet::PeriodicPotential<f64>;
pub type Complex = Cx<f64>;
