//! Space-time cut finite elements for the heat equation on two overlapping
//! meshes in one space dimension.
//!
//! A stationary background mesh covers the domain and a second mesh moves
//! across it with piecewise constant velocity. The discrete solution is
//! discontinuous in time (dG(0) or dG(1)) and continuous piecewise linear
//! in space on each mesh, coupled at the interfaces by Nitsche's method.
//!
//! ```no_run
//! use stcutfem::{manufactured_problem, march, xnorm_error, Discretization, OverlapSpec, TimeDegree, Velocity};
//!
//! let problem = manufactured_problem();
//! let overlap = OverlapSpec::new(0.25, 0.125, Velocity::Constant(0.2));
//! let disc = Discretization::new(64, 16, 64, TimeDegree::One);
//! let u_h = march(&problem, &overlap, &disc).unwrap();
//! let err = xnorm_error(&u_h, problem.exact.as_ref().unwrap());
//! println!("{err:.3e}");
//! ```

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod norms;
pub mod par;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod spaces;

pub use assembly::{assemble_slab, PreviousTrace, SlabSystem};
pub use error::{Error, Result};
pub use geometry::{Interface, Side, SlabGeometry};
pub use norms::{bnorm, breakdown, error_breakdown, lls_slope, xnorm, xnorm_error, NormBreakdown};
pub use par::Execution;
pub use problem::{
    manufactured_problem, Discretization, ExactSolution, Interval, OverlapSpec, ProblemSpec, SpaceTimeMesh,
    TimeDegree, Velocity, VelocityMode,
};
pub use quadrature::TimeRule;
pub use solver::{march, march_on, march_with, SolveStats};
pub use spaces::{EvalSide, SlabFunction, SlabSpace, SpaceTimeSolution};
