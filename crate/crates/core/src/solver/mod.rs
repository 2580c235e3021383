//! Piecewise-linear finite element solver for the weighted p-torsion problem.

pub mod mesh;
mod richardson;
pub mod sparse;
mod torsion;

pub use mesh::{triangulate, Mesh, MeshStats};
pub use richardson::{default_h_list, extrapolate, richardson_t, RichardsonResult};
pub use torsion::{
    rayleigh_check, rayleigh_quotient, solve_torsion, SolveSummary, TorsionResult, DEFAULT_TOL, P_MAX, P_MIN,
};
