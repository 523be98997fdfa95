//! Relative metrics on ℝⁿ and their quasihyperbolic, quasiconvexity and
//! Möbius-geometric companions.

pub mod ball;
pub mod error;
pub mod expr;
pub mod fuzz;
pub mod grid;
pub mod hyperbolic;
pub mod means;
pub mod optimize;
pub mod quadrature;
pub mod quasiconvexity;
pub mod quasihyperbolic;
pub mod relative_metric;
pub mod vector;
pub mod weight;

pub use error::{Error, Result};
pub use grid::SampleGrid;
pub use weight::WeightFunction;
