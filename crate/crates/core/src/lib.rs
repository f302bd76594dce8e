//! Exact computations around R-filtrations, their Dirac measures and
//! concave polygons, together with the convergence machinery for graded,
//! split-bundle and bigraded models.

pub mod bigraded;
pub mod bundles;
pub mod cli;
pub mod coupling;
pub mod error;
pub mod filtration;
pub mod graded;
pub mod linalg;
pub mod limits;
pub mod measure;
pub mod polygon;
pub mod rational;
pub mod simplex;

pub use error::{Error, Result};
pub use rational::Rational;
