//! Copositive-programming bounds on the stability number of graphs.
//!
//! The crate builds the sums-of-squares inner approximations of the
//! copositive cone, decides membership through a conic solver, verifies
//! and transforms the resulting certificates, and derives stability-number
//! bounds and rank estimates for graphs.

pub mod bounds;
pub mod certificates;
pub mod cli;
pub mod conic;
pub mod copositivity;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod membership;
pub mod poly;
pub mod reproduce;

pub use error::{CoposError, Result};
pub use graph::{Family, Graph};
pub use matrix::SymMatrix;
