//! Planar convex geometry and p-torsional rigidity.

pub mod bounds;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod parallel;
pub mod quantitative;
pub mod shapes;
pub mod solver;

pub use error::{Error, Result};
