//! Boundary value problems on the traced curves and their numerical solution.

pub mod boundary;
pub mod conformal;
pub mod rh;
pub mod solve;
pub mod vector;

pub use boundary::{derive_boundary_condition, derive_unchecked, identity_residual, BoundaryCondition};
pub use conformal::{conformal_gluing, conformal_map, ConformalGluing, ConformalMethod};
pub use solve::{solve_lukasiewicz, solve_small_steps, AxisSolution, ResidualReport, SolutionBundle, SolveOptions};
pub use vector::{assemble_vector_bvp, vector_identity_residual, VectorCondition, VectorSystem};
