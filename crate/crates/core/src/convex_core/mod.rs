//! Interior-point machinery for smooth convex programs.

pub mod barrier;
pub mod expr;
pub mod layout;
pub mod linalg;
pub mod program;
pub mod projection;

pub use barrier::{
    solve_feasibility, solve_min, solve_min_with, strictly_feasible, BarrierOptions, Feasibility,
    MinResult,
};
pub use expr::{Func, LinExpr, Smooth};
pub use program::{check_gradients, ConvexProgram, GradientMismatch};
pub use projection::build_projection_program;
