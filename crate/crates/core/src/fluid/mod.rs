//! Fluid field: Poiseuille relations and the steady axisymmetric solver.

mod analytic;
mod banded;
mod grid;
mod params;
mod solver;

pub use analytic::{poiseuille, reynolds};
pub use grid::{build_grid, deform_grid, AxisymGrid, DEFAULT_STRETCH};
pub use params::{parse_pressure, FluidParams};
pub use solver::{solve_steady_flow, FlowSolution, SolverOptions};
